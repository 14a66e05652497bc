"""Command-line interface.

Subcommands build a request model, send it to the service (in-process by
default, or a remote --server URL), and write the returned CSV/JSON to the
output directory.  `serve` is the one command that runs servers instead:
the newline-JSON byte protocol on TCP or stdio for trainers, and the HTTP
API for everything else.
"""

from __future__ import annotations

import json
import pathlib

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

import click

from .client import ServiceClient
from .harness import fallback_seed


def parse_graphon(text: str) -> dict:
    """'constant:0.5', 'ws-limit:0.2:0.3', or a raw JSON spec."""
    if text.lstrip().startswith("{"):
        return json.loads(text)
    parts = text.split(":")
    if parts[0] == "constant":
        return {"kind": "constant", "params": {"p": float(parts[1])}}
    if parts[0] in ("ws-limit", "watts_strogatz_limit"):
        return {
            "kind": "watts_strogatz_limit",
            "params": {"radius": float(parts[1]), "beta": float(parts[2])},
        }
    raise click.BadParameter(f"cannot parse graphon spec {text!r}")


def load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    p = pathlib.Path(path)
    if p.suffix == ".toml":
        return tomllib.loads(p.read_text())
    return json.loads(p.read_text())


def build_graph_source(cfg: dict, opts) -> dict:
    graph = dict(cfg.get("graph", {}))
    if opts["graph"]:
        graph["kind"] = opts["graph"]
    graph.setdefault("kind", "watts_strogatz")
    for key in ("m", "k", "beta", "p_in", "p_out", "path"):
        if opts.get(key) is not None:
            graph[key] = opts[key]
    if opts.get("blocks"):
        graph["blocks"] = [int(x) for x in opts["blocks"].split(",")]
    if opts.get("graphon"):
        graph["graphon"] = parse_graphon(opts["graphon"])
    return graph


def build_episode_config(cfg: dict, opts) -> dict:
    out = {k: v for k, v in cfg.items() if k != "graph"}
    out["graph"] = build_graph_source(cfg, opts)
    for key in ("steps", "sigma", "policy", "reward_mode", "mu_domain"):
        if opts.get(key) is not None:
            out[key] = opts[key]
    if opts.get("weights"):
        out["weights"] = opts["weights"]
    seed = opts.get("seed")
    for name in ("graph_seed", "noise_seed", "policy_seed"):
        if opts.get(name) is not None:
            out[name] = opts[name]
        elif seed is not None:
            out[name] = seed
        elif name not in out:
            out[name] = fallback_seed()
    return out


def write_outputs(out_dir: str, files: dict[str, str]) -> None:
    base = pathlib.Path(out_dir)
    base.mkdir(parents=True, exist_ok=True)
    for name, content in files.items():
        (base / name).write_text(content)
        click.echo(f"wrote {base / name}")


def json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


graph_options = [
    click.option("--graph", type=click.Choice(["watts_strogatz", "sbm", "graphml", "graphon", "explicit"]), default=None),
    click.option("--m", type=int, default=None, help="node count (synthetic families)"),
    click.option("--k", type=int, default=None, help="WS lattice degree"),
    click.option("--beta", type=float, default=None, help="WS rewiring probability"),
    click.option("--blocks", type=str, default=None, help="SBM block sizes, comma-separated"),
    click.option("--p-in", "p_in", type=float, default=None),
    click.option("--p-out", "p_out", type=float, default=None),
    click.option("--path", type=str, default=None, help="GraphML file"),
    click.option("--graphon", type=str, default=None, help="graphon spec, e.g. constant:0.5"),
]

episode_options = [
    click.option("--config", "config_file", type=str, default=None, help="TOML/JSON config mirroring the flags"),
    click.option("--steps", type=int, default=None),
    click.option("--sigma", type=float, default=None),
    click.option("--policy", type=click.Choice(["silence", "uniform", "age", "grnn"]), default=None),
    click.option("--weights", type=str, default=None, help="weight file for the grnn policy"),
    click.option("--reward", "reward_mode", type=click.Choice(["realized", "expected"]), default=None),
    click.option("--mu-domain", "mu_domain", type=click.Choice(["full", "neighbors"]), default=None),
    click.option("--seed", type=int, default=None, help="sets all three seed streams"),
    click.option("--graph-seed", type=int, default=None),
    click.option("--noise-seed", type=int, default=None),
    click.option("--policy-seed", type=int, default=None),
]


def add_options(options):
    def wrap(fn):
        for option in reversed(options):
            fn = option(fn)
        return fn

    return wrap


@click.group()
@click.option("--server", type=str, default=None, help="remote service URL; default runs in-process")
@click.pass_context
def main(ctx, server):
    ctx.obj = {"server": server}


@main.command()
@add_options(episode_options)
@add_options(graph_options)
@click.option("--episode", type=int, default=0)
@click.option("--slots", is_flag=True, help="also write per-slot metrics")
@click.option("--out", type=str, default="out")
@click.pass_context
def run(ctx, config_file, episode, slots, out, **opts):
    """Run one seeded episode and write its metrics."""
    cfg = build_episode_config(load_config_file(config_file), opts)
    with ServiceClient(ctx.obj["server"]) as client:
        reply = client.run(cfg, episode=episode, with_slots=slots)
    files = {"episodes.csv": reply["csv"], "summary.json": json_text(reply["result"])}
    if slots and reply.get("slots_csv"):
        files["slots.csv"] = reply["slots_csv"]
    write_outputs(out, files)


@main.command("eval")
@add_options(episode_options)
@add_options(graph_options)
@click.option("--episodes", type=int, default=30)
@click.option("--out", type=str, default="out")
@click.pass_context
def eval_cmd(ctx, config_file, episodes, out, **opts):
    """Evaluate a policy over independent episodes (fresh graphs or fresh
    relabelings) and write per-episode rows plus the aggregate."""
    cfg = build_episode_config(load_config_file(config_file), opts)
    with ServiceClient(ctx.obj["server"]) as client:
        reply = client.evaluate(cfg, episodes)
    write_outputs(out, {"episodes.csv": reply["csv"], "summary.json": json_text(reply["summary"])})


@main.command("transfer-sweep")
@add_options(episode_options)
@add_options(graph_options)
@click.option("--m-list", type=str, default="10,20,30,40,50")
@click.option("--episodes", type=int, default=30)
@click.option("--baselines", type=str, default="uniform,age")
@click.option("--out", type=str, default="out")
@click.pass_context
def transfer_sweep_cmd(ctx, config_file, m_list, episodes, baselines, out, **opts):
    """Evaluate fixed weights across network sizes alongside baselines."""
    cfg = build_episode_config(load_config_file(config_file), opts)
    cfg.setdefault("policy", "grnn")
    sizes = [int(x) for x in m_list.split(",")]
    cfg["graph"].setdefault("m", sizes[0])  # replaced per swept size
    with ServiceClient(ctx.obj["server"]) as client:
        reply = client.sweep(cfg, sizes, episodes, baselines.split(","))
    write_outputs(out, {"sweep.csv": reply["csv"], "sweep.json": json_text(reply["rows"])})


@main.command("transfer-lab")
@click.option("--check", type=click.Choice(["theorem1", "theorem2", "both"]), default="both")
@click.option("--graphon", type=str, default="constant:0.5")
@click.option("--m-list", type=str, default="10,20,40,80")
@click.option("--n", type=int, default=1024)
@click.option("--epsilon", type=float, default=0.25)
@click.option("--seeds", type=int, default=20, help="number of seeds per network size")
@click.option("--weights", type=str, default=None, help="weight file (F=G=1); default random network")
@click.option("--net-seed", type=int, default=0)
@click.option("--recurrence", "T", type=int, default=2)
@click.option("--out", type=str, default="out")
@click.pass_context
def transfer_lab_cmd(ctx, check, graphon, m_list, n, epsilon, seeds, weights, net_seed, T, out):
    """Numerically verify the transferability bounds and write the report."""
    payload = {
        "graphon": parse_graphon(graphon),
        "m_list": [int(x) for x in m_list.split(",")],
        "n": n,
        "epsilon": epsilon,
        "seeds": list(range(seeds)),
        "network": {"seed": net_seed, "T": T},
    }
    if weights:
        payload["weights"] = json.loads(pathlib.Path(weights).read_text())
    files = {}
    totals = []
    with ServiceClient(ctx.obj["server"]) as client:
        if check in ("theorem1", "both"):
            reply = client.theorem(1, payload)
            files["theorem1.csv"] = reply["csv"]
            totals.append(("theorem1", reply["violations"], len(reply["rows"])))
        if check in ("theorem2", "both"):
            reply = client.theorem(2, payload)
            files["theorem2.csv"] = reply["csv"]
            totals.append(("theorem2", reply["violations"], len(reply["rows"])))
    write_outputs(out, files)
    for name, violations, rows in totals:
        click.echo(f"{name}: {rows} rows, {violations} bound violations")


@main.command()
@click.option("--port", type=int, default=None, help="serve the byte protocol on TCP")
@click.option("--stdio", is_flag=True, help="serve one byte-protocol session on stdin/stdout")
@click.option("--http", "http_port", type=int, default=None, help="serve the HTTP API")
@click.option("--host", type=str, default="127.0.0.1")
@click.option("--seed", type=int, default=None, help="default session seed")
def serve(port, stdio, http_port, host, seed):
    """Run environment servers for external trainers and tooling."""
    seed = seed if seed is not None else fallback_seed()
    chosen = [x for x in (port, stdio or None, http_port) if x]
    if len(chosen) != 1:
        raise click.UsageError("pick exactly one of --port, --stdio, --http")
    if stdio:
        from .envserver import serve_stdio

        serve_stdio(default_seed=seed)
        return
    if port is not None:
        from .envserver import serve_tcp

        click.echo(f"byte protocol on {host}:{port}", err=True)
        serve_tcp(host=host, port=port, default_seed=seed)
        return
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=host, port=http_port, log_level="warning")


if __name__ == "__main__":
    main()
