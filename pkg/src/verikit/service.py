"""HTTP reward service.

Endpoints: POST /v1/equivalence, POST /v1/reward, POST /v1/batch, and
GET /healthz. Design-level refusals (unsupported constructs, interface
mismatches) are 200 responses carrying the verdict, so reward loops never
have to special-case them; only malformed requests get 4xx. Errors are
{"code", "message"} JSON bodies.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from contextlib import asynccontextmanager
from dataclasses import dataclass

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from verikit import __version__
from verikit.equiv import CheckConfig

__all__ = ["ServiceConfig", "create_app"]

PROTOCOL_VERSION = 1


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8714
    workers: int = 0  # 0 means one per available core
    allow_overrides: bool = True
    max_source_bytes: int = 2_000_000

    def resolved_workers(self) -> int:
        return self.workers if self.workers >= 1 else (os.cpu_count() or 1)


class PlanOverrides(BaseModel):
    m: int | None = Field(default=None, ge=1)
    n: int | None = Field(default=None, ge=1)
    seed: int | None = None
    early_exit: bool | None = None
    top_hint: str | None = None


class EquivalenceRequest(BaseModel):
    golden_source: str
    candidate_source: str
    overrides: PlanOverrides | None = None


class PenaltySpec(BaseModel):
    l_max: int = 16384
    l_cache: int = 1024
    length: int | None = Field(default=None, ge=0)


class RewardRequest(BaseModel):
    golden_source: str
    response_text: str
    penalty: PenaltySpec | None = None
    overrides: PlanOverrides | None = None


class BatchPair(BaseModel):
    id: str
    golden_source: str
    candidate_source: str


class BatchRequest(BaseModel):
    pairs: list[BatchPair]
    overrides: PlanOverrides | None = None


def _merge_config(overrides: PlanOverrides | None, allow: bool) -> CheckConfig:
    cfg = CheckConfig()
    if overrides is None or not allow:
        return cfg
    if overrides.m is not None:
        cfg.m = overrides.m
    if overrides.n is not None:
        cfg.n = overrides.n
    if overrides.seed is not None:
        cfg.seed = overrides.seed
    if overrides.early_exit is not None:
        cfg.early_exit = overrides.early_exit
    if overrides.top_hint is not None:
        cfg.top_hint = overrides.top_hint
    return cfg


def _pool_equivalence(golden: str, candidate: str, cfg: dict) -> dict:
    from verikit.equiv import CheckConfig, check_sources

    return check_sources(golden, candidate, CheckConfig(**cfg)).to_dict()


def _pool_reward(golden: str, response_text: str, cfg: dict,
                 penalty: dict | None) -> dict:
    from verikit.equiv import CheckConfig
    from verikit.rl.rewards import LengthPenaltyConfig, reward_outcome

    pen = None
    length = None
    if penalty is not None:
        length = penalty.pop("length", None)
        pen = LengthPenaltyConfig(**penalty)
    out = reward_outcome(response_text, golden, CheckConfig(**cfg), pen, length)
    return {
        "reward": out.reward,
        "format_ok": out.format_ok,
        "epsilon": out.epsilon,
        "detail": out.detail,
    }


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig()

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        app.state.pool = ProcessPoolExecutor(max_workers=config.resolved_workers())
        try:
            yield
        finally:
            app.state.pool.shutdown(wait=True)

    app = FastAPI(title="verikit reward service", lifespan=lifespan)

    @app.exception_handler(RequestValidationError)
    async def bad_request(_req: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={"code": "bad_request", "message": str(exc.errors()[:3])},
        )

    def check_size(*sources: str):
        total = sum(len(s.encode("utf-8", "ignore")) for s in sources)
        if total > config.max_source_bytes:
            return JSONResponse(
                status_code=413,
                content={"code": "payload_too_large",
                         "message": f"{total} bytes exceeds {config.max_source_bytes}"},
            )
        return None

    def cfg_dict(overrides: PlanOverrides | None) -> dict:
        cfg = _merge_config(overrides, config.allow_overrides)
        return {"m": cfg.m, "n": cfg.n, "seed": cfg.seed,
                "early_exit": cfg.early_exit, "top_hint": cfg.top_hint}

    @app.get("/healthz")
    def healthz():
        return {
            "status": "ok",
            "version": __version__,
            "protocol": PROTOCOL_VERSION,
            "workers": config.resolved_workers(),
        }

    @app.post("/v1/equivalence")
    def equivalence(req: EquivalenceRequest):
        oversize = check_size(req.golden_source, req.candidate_source)
        if oversize is not None:
            return oversize
        fut = app.state.pool.submit(
            _pool_equivalence, req.golden_source, req.candidate_source,
            cfg_dict(req.overrides),
        )
        return fut.result()

    @app.post("/v1/reward")
    def reward(req: RewardRequest):
        oversize = check_size(req.golden_source, req.response_text)
        if oversize is not None:
            return oversize
        penalty = req.penalty.model_dump() if req.penalty is not None else None
        fut = app.state.pool.submit(
            _pool_reward, req.golden_source, req.response_text,
            cfg_dict(req.overrides), penalty,
        )
        return fut.result()

    @app.post("/v1/batch")
    def batch(req: BatchRequest):
        oversize = check_size(*(p.golden_source + p.candidate_source for p in req.pairs))
        if oversize is not None:
            return oversize
        ids = [p.id for p in req.pairs]
        if len(ids) != len(set(ids)):
            return JSONResponse(status_code=400,
                                content={"code": "bad_request",
                                         "message": "pair ids must be unique"})
        started = time.monotonic()
        cfg = cfg_dict(req.overrides)
        futures = [
            app.state.pool.submit(_pool_equivalence, p.golden_source,
                                  p.candidate_source, cfg)
            for p in req.pairs
        ]
        reports = []
        for p, fut in zip(req.pairs, futures):
            d = fut.result()
            d["id"] = p.id
            reports.append(d)
        wall = time.monotonic() - started
        stats = {
            "pairs": len(reports),
            "wall_time": wall,
            "instances_per_second": (len(reports) / wall) if wall > 0 else 0.0,
            "per_instance": [r.get("wall_time", 0.0) for r in reports],
        }
        return {"reports": reports, "stats": stats}

    return app
