"""JSON-over-HTTP service exposing per-robot posteriors, predictions, and what-ifs.

State is kept in memory and journaled to an append-only JSON-lines event log
per robot; on startup the journal is replayed, so the posterior always equals
a fresh re-derivation from the stored inspections.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from .bayes import BayesError, InspectionLog, PosteriorState, update_posterior
from .ctmc import CtmcError, SeverityPath, TaskSeverityModel, stationary_distribution
from .rld import (
    DegenerateDriftError,
    RldError,
    WhatIfScenario,
    effective_rate,
    rld_approach1,
    rld_approach2,
    rul_median,
    whatif,
)

MAX_MC_PATHS = 100_000
LOCK_TIMEOUT_S = 10.0


class RobotConfig(BaseModel):
    threshold: float
    gamma: float
    cycles_per_epoch: int = Field(ge=1)
    initial_accuracy: float = 0.0


class RegisterRequest(BaseModel):
    robot_id: str
    model: dict
    config: RobotConfig


class EpochIn(BaseModel):
    cycles: float
    time: float
    accuracy: float


class SegmentIn(BaseModel):
    state: str
    start_time: float
    end_time: float


class InspectionsRequest(BaseModel):
    epochs: list[EpochIn]
    task_segments: list[SegmentIn]


class WhatIfRequest(BaseModel):
    scenarios: list[list[float]]


class Robot:
    """In-memory robot record; mutations serialized by an exclusive lock."""

    def __init__(self, robot_id: str, model: TaskSeverityModel, config: RobotConfig):
        self.robot_id = robot_id
        self.model = model
        self.config = config
        self.lock = threading.Lock()
        self.cycles = [0.0]
        self.times = [0.0]
        self.accuracy = [config.initial_accuracy]
        self.seg_states: list[str] = []
        self.seg_starts: list[float] = []
        self.seg_ends: list[float] = []
        self.posterior = PosteriorState.diffuse(config.gamma, model.states)

    def task_history(self) -> SeverityPath:
        if not self.seg_states:
            raise BayesError("no task history recorded yet")
        return SeverityPath(
            tuple(self.seg_states), np.array(self.seg_starts), np.array(self.seg_ends)
        )

    def log(self) -> InspectionLog:
        return InspectionLog(
            np.array(self.cycles),
            np.array(self.times),
            np.array(self.accuracy),
            self.task_history(),
            self.config.cycles_per_epoch,
        )

    def apply_inspections(self, req: InspectionsRequest) -> None:
        n_c = self.config.cycles_per_epoch
        cycles, times, acc = list(self.cycles), list(self.times), list(self.accuracy)
        for ep in req.epochs:
            if ep.cycles <= cycles[-1] or ep.time <= times[-1]:
                raise BayesError("epochs must have strictly increasing cycles and times")
            if abs(ep.cycles - cycles[-1] - n_c) > 1e-9:
                raise BayesError(f"cycle counts must advance by {n_c}")
            cycles.append(ep.cycles)
            times.append(ep.time)
            acc.append(ep.accuracy)
        seg_states = list(self.seg_states)
        seg_starts = list(self.seg_starts)
        seg_ends = list(self.seg_ends)
        for seg in req.task_segments:
            expected_start = seg_ends[-1] if seg_ends else 0.0
            if abs(seg.start_time - expected_start) > 1e-9:
                raise BayesError("task segments must be contiguous with the history")
            if seg.end_time <= seg.start_time:
                raise BayesError("task segment must have end_time > start_time")
            if seg.state not in self.model.severity:
                raise BayesError(f"unknown severity state {seg.state!r}")
            seg_states.append(seg.state)
            seg_starts.append(seg.start_time)
            seg_ends.append(seg.end_time)
        candidate = InspectionLog(
            np.array(cycles), np.array(times), np.array(acc),
            SeverityPath(tuple(seg_states), np.array(seg_starts), np.array(seg_ends)),
            n_c,
        )
        self.posterior = update_posterior(self.posterior, candidate, self.model.severity)
        self.cycles, self.times, self.accuracy = cycles, times, acc
        self.seg_states, self.seg_starts, self.seg_ends = seg_states, seg_starts, seg_ends

    def current_accuracy(self) -> float:
        return float(self.accuracy[-1])

    def current_state(self) -> str:
        return self.seg_states[-1] if self.seg_states else self.model.states[0]


class RobotStore:
    def __init__(self, data_dir):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.robots: dict[str, Robot] = {}
        self.registry_lock = threading.Lock()
        self._replay()

    def _journal_path(self, robot_id: str) -> Path:
        safe = "".join(c if c.isalnum() or c in "-_" else "_" for c in robot_id)
        return self.data_dir / f"{safe}.jsonl"

    def _replay(self) -> None:
        for path in sorted(self.data_dir.glob("*.jsonl")):
            robot = None
            with open(path) as fh:
                for line in fh:
                    event = json.loads(line)
                    if event["type"] == "register":
                        robot = Robot(
                            event["robot_id"],
                            TaskSeverityModel.from_json(json.dumps(event["model"])),
                            RobotConfig(**event["config"]),
                        )
                    elif event["type"] == "inspections" and robot is not None:
                        robot.apply_inspections(InspectionsRequest(**event["body"]))
            if robot is not None:
                self.robots[robot.robot_id] = robot

    def append_event(self, robot_id: str, event: dict) -> None:
        with open(self._journal_path(robot_id), "a") as fh:
            fh.write(json.dumps(event) + "\n")

    def get(self, robot_id: str) -> Robot:
        robot = self.robots.get(robot_id)
        if robot is None:
            raise HTTPException(status_code=404, detail=f"unknown robot {robot_id!r}")
        return robot


def create_app(data_dir) -> FastAPI:
    app = FastAPI(title="rulcast", version="0.1.0")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    store = RobotStore(data_dir)
    app.state.store = store

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "robots": len(store.robots)}

    @app.post("/robots", status_code=201)
    def register(req: RegisterRequest):
        with store.registry_lock:
            if req.robot_id in store.robots:
                raise HTTPException(status_code=409, detail="robot already registered")
            try:
                model = TaskSeverityModel.from_json(json.dumps(req.model))
                robot = Robot(req.robot_id, model, req.config)
            except (CtmcError, BayesError, ValueError) as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
            store.robots[req.robot_id] = robot
            store.append_event(
                req.robot_id,
                {"type": "register", "robot_id": req.robot_id,
                 "model": json.loads(model.to_json()),
                 "config": req.config.model_dump()},
            )
        return {"robot_id": req.robot_id}

    @app.post("/robots/{robot_id}/inspections")
    def post_inspections(robot_id: str, req: InspectionsRequest):
        robot = store.get(robot_id)
        if not robot.lock.acquire(timeout=LOCK_TIMEOUT_S):
            raise HTTPException(status_code=409, detail="concurrent update in progress")
        try:
            robot.apply_inspections(req)
            store.append_event(
                robot_id, {"type": "inspections", "body": req.model_dump()}
            )
        except (BayesError, CtmcError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        finally:
            robot.lock.release()
        return {"epochs_seen": robot.posterior.epochs_seen}

    @app.get("/robots/{robot_id}/posterior")
    def get_posterior(robot_id: str):
        robot = store.get(robot_id)
        return json.loads(robot.posterior.to_json())

    @app.get("/robots/{robot_id}/rld")
    def get_rld(
        robot_id: str,
        approach: int = Query(ge=1, le=2),
        M: int = Query(default=10000, ge=1, le=MAX_MC_PATHS),
        horizon: float | None = None,
        seed: int | None = None,
    ):
        robot = store.get(robot_id)
        a_ck = robot.current_accuracy()
        threshold = robot.config.threshold
        psi = robot.model.severity_vector()
        try:
            if approach == 1:
                pi = stationary_distribution(robot.model)
                rate = effective_rate(robot.posterior.mean, pi, psi)
                closed = rld_approach1(a_ck, threshold, rate, robot.posterior.gamma)
                med = rul_median(closed)
                return json.loads(closed.to_json(median_hours=med.hours))
            if seed is None:
                raise HTTPException(status_code=422,
                                    detail="approach 2 requires an explicit seed")
            if horizon is None:
                pi = stationary_distribution(robot.model)
                rate = effective_rate(robot.posterior.mean, pi, psi)
                horizon = 50.0 * (threshold - a_ck) / rate
            emp = rld_approach2(
                a_ck, threshold, robot.posterior, robot.model,
                robot.current_state(), M, horizon, seed,
            )
            return json.loads(emp.to_json())
        except (DegenerateDriftError, RldError, CtmcError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc

    @app.post("/robots/{robot_id}/whatif")
    def post_whatif(robot_id: str, req: WhatIfRequest):
        robot = store.get(robot_id)
        try:
            scenarios = [WhatIfScenario(np.array(p, dtype=float)) for p in req.scenarios]
            rows = whatif(
                robot.posterior, robot.current_accuracy(), robot.config.threshold,
                scenarios, robot.model.severity_vector(),
            )
        except (RldError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return {
            "rows": [
                {
                    "pi": list(r.pi),
                    "median_hours": r.median_hours,
                    "ig_mean": r.ig_mean,
                    "ig_shape": r.ig_shape,
                }
                for r in rows
            ]
        }

    return app
