"""HTTP face of the engine: episode runs, evaluations, transfer sweeps, the
bound checks, a forward-pass parity endpoint, and HTTP-mirrored environment
sessions.  The newline-JSON byte protocol (envserver) remains the trainer
interconnect; these endpoints wrap the same core for tooling and the CLI.
"""

from __future__ import annotations

import json
import threading
import uuid

import numpy as np
from fastapi import FastAPI, HTTPException

from .. import __version__
from ..errors import NetsamplerError
from ..graphon import GraphonSpec
from ..grnn import GrnnWeights, grnn_forward, load_weights, random_weights, shift_operator
from ..harness import (
    EPISODE_COLUMNS,
    SLOT_COLUMNS,
    TRANSFER_LAB_COLUMNS,
    evaluate_policy,
    report_csv,
    report_summary,
    rows_to_csv,
    run_episode,
    transfer_sweep,
)
from ..protocol import EnvSession
from ..topology import Topology
from ..transfer import default_signals, theorem1_check, theorem2_check
from .models import (
    EvalRequest,
    EvalResponse,
    ForwardRequest,
    ForwardResponse,
    GraphRequest,
    GraphResponse,
    HealthResponse,
    RunRequest,
    RunResponse,
    SessionCreateRequest,
    SessionCreateResponse,
    SessionMessage,
    SweepRequest,
    SweepResponse,
    TheoremRequest,
    TheoremResponse,
)


def _kernel_weights(req: TheoremRequest) -> GrnnWeights:
    if req.weights is not None:
        return load_weights(json.dumps(req.weights))
    spec = req.network
    return random_weights(F=1, H=spec.H, G=1, T=spec.T, L=spec.L, seed=spec.seed, scale=spec.scale)


def create_app() -> FastAPI:
    app = FastAPI(title="netsampler", version=__version__)
    sessions: dict[str, EnvSession] = {}
    lock = threading.Lock()

    @app.exception_handler(NetsamplerError)
    async def _domain_error(request, exc):  # noqa: ANN001
        from fastapi.responses import JSONResponse

        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.get("/health", response_model=HealthResponse)
    def health():
        return HealthResponse(status="ok", version=__version__)

    @app.post("/graphs", response_model=GraphResponse)
    def make_graph(req: GraphRequest):
        topo = req.source.build(seed=req.seed)
        return GraphResponse(**topo.to_dict())

    @app.post("/run", response_model=RunResponse)
    def run(req: RunRequest):
        slot_log = [] if req.with_slots else None
        result = run_episode(req.config, episode=req.episode, slot_log=slot_log)
        slots_csv = None
        if slot_log is not None:
            slots_csv = rows_to_csv(
                [dict(zip(SLOT_COLUMNS, row)) for row in slot_log], SLOT_COLUMNS
            )
        row_csv = rows_to_csv([result.model_dump()], EPISODE_COLUMNS)
        return RunResponse(result=result, csv=row_csv, slots_csv=slots_csv)

    @app.post("/eval", response_model=EvalResponse)
    def evaluate(req: EvalRequest):
        report = evaluate_policy(req.config, episodes=req.episodes)
        return EvalResponse(
            summary=report_summary(report), rows=report.episodes, csv=report_csv(report)
        )

    @app.post("/transfer/sweep", response_model=SweepResponse)
    def sweep(req: SweepRequest):
        rows = transfer_sweep(req.config, req.m_list, episodes=req.episodes, baselines=req.baselines)
        columns = list(rows[0].keys()) if rows else []
        return SweepResponse(rows=rows, csv=rows_to_csv(rows, columns))

    @app.post("/transfer/theorem1", response_model=TheoremResponse)
    def theorem1(req: TheoremRequest):
        w = _kernel_weights(req)
        rows = theorem1_check(
            w,
            GraphonSpec.from_dict(req.graphon),
            None,
            m_list=req.m_list,
            n=req.n,
            epsilon=req.epsilon,
            seeds=req.seeds,
            constants=req.constants,
        )
        return TheoremResponse(
            rows=rows,
            csv=rows_to_csv(rows, TRANSFER_LAB_COLUMNS),
            violations=sum(r["violation_flag"] for r in rows),
        )

    @app.post("/transfer/theorem2", response_model=TheoremResponse)
    def theorem2(req: TheoremRequest):
        w = _kernel_weights(req)
        rows = theorem2_check(
            w,
            GraphonSpec.from_dict(req.graphon),
            default_signals(w.T),
            default_signals(w.T, phase=np.pi / 2),
            m_list=req.m_list,
            n=req.n,
            seeds=req.seeds,
        )
        return TheoremResponse(
            rows=rows,
            csv=rows_to_csv(rows, TRANSFER_LAB_COLUMNS),
            violations=sum(r["violation_flag"] for r in rows),
        )

    @app.post("/grnn/forward", response_model=ForwardResponse)
    def forward(req: ForwardRequest):
        w = load_weights(json.dumps(req.weights))
        graph = req.graph
        if "kind" in graph:
            from ..harness import GraphSource

            topo = GraphSource.model_validate(graph).build(seed=int(graph.get("seed", 0)))
        else:
            topo = Topology.from_dict(graph)
        s = shift_operator(topo, req.shift_normalization)
        inputs = [np.asarray(x, dtype=float) for x in req.inputs]
        z0 = np.asarray(req.z0, dtype=float) if req.z0 is not None else None
        y, z = grnn_forward(w, s, inputs, z0=z0, return_state=True)
        return ForwardResponse(output=y.tolist(), final_state=z.tolist())

    @app.post("/sessions", response_model=SessionCreateResponse)
    def create_session(req: SessionCreateRequest):
        sid = uuid.uuid4().hex
        with lock:
            sessions[sid] = EnvSession(default_seed=req.default_seed)
        return SessionCreateResponse(session_id=sid)

    @app.post("/sessions/{sid}/message")
    def session_message(sid: str, msg: SessionMessage):
        with lock:
            session = sessions.get(sid)
        if session is None:
            raise HTTPException(status_code=404, detail="no such session")
        return session.handle(msg.message)

    @app.delete("/sessions/{sid}")
    def close_session(sid: str):
        with lock:
            sessions.pop(sid, None)
        return {"closed": sid}

    return app
