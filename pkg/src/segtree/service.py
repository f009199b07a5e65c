"""Session-based JSON service over the engine, for the CLI's serve mode and the UI.

Configuration comes from environment variables: SEGTREE_HOST / SEGTREE_PORT
(bind address), SEGTREE_MAX_UPLOAD_BYTES (default 256 MiB), SEGTREE_WORKERS
(evaluation threads), SEGTREE_SESSION_LOG (optional append-log persistence).
"""

from __future__ import annotations

import base64
import json
import os
import secrets
import threading
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import anomaly as anomaly_mod
from .engine import SegmentTree, carry_over, evaluate, export_tree_csv
from .errors import (
    Conflict,
    EvaluationCancelled,
    NotFound,
    QueryError,
    SegtreeError,
    UnknownNode,
)
from .guidance import sibling_distances
from .query import QuerySpec, parse_query
from .series import TimeSeries, iso_utc, parse_csv
from .techniques.patterns import motif_instances

DEFAULT_MAX_UPLOAD = 256 * 1024 * 1024

_STATUS = {
    "not_found": 404,
    "unknown_node": 404,
    "conflict": 409,
    "evaluation_cancelled": 409,
    "too_few_points": 400,
    "period_too_long": 400,
}


@dataclass
class Session:
    session_id: str
    series: dict[str, TimeSeries] = field(default_factory=dict)
    trees: dict[str, SegmentTree] = field(default_factory=dict)
    queries: dict[str, QuerySpec] = field(default_factory=dict)
    caches: dict[str, dict] = field(default_factory=dict)
    forwarded: dict[str, list[dict]] = field(default_factory=lambda: {"temporal": [], "geographic": []})
    progress: dict[str, dict] = field(default_factory=dict)
    cancels: dict[str, threading.Event] = field(default_factory=dict)
    lock: threading.RLock = field(default_factory=threading.RLock)


class SessionStore:
    """In-memory sessions with optional single-file append-log persistence."""

    def __init__(self, log_path: str | None = None):
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        self._log_path = log_path
        self._replaying = False
        if log_path and os.path.exists(log_path):
            self._replay(log_path)

    def create(self) -> Session:
        with self._lock:
            sid = secrets.token_urlsafe(9)
            while sid in self._sessions:
                sid = secrets.token_urlsafe(9)
            s = Session(sid)
            self._sessions[sid] = s
        self.log({"op": "create", "session": sid})
        return s

    def get(self, sid: str) -> Session:
        try:
            return self._sessions[sid]
        except KeyError:
            raise NotFound(f"no session {sid!r}") from None

    def log(self, event: dict) -> None:
        if not self._log_path or self._replaying:
            return
        with self._lock, open(self._log_path, "a", encoding="utf-8") as f:
            f.write(json.dumps(event, separators=(",", ":")) + "\n")

    def _replay(self, path: str) -> None:
        self._replaying = True
        try:
            with open(path, encoding="utf-8") as f:
                for line in f:
                    line = line.strip()
                    if line:
                        self._apply(json.loads(line))
        finally:
            self._replaying = False

    def _apply(self, ev: dict) -> None:
        op = ev.get("op")
        if op == "create":
            self._sessions[ev["session"]] = Session(ev["session"])
            return
        s = self._sessions.get(ev.get("session", ""))
        if s is None:
            return
        try:
            if op == "upload":
                csv = base64.b64decode(ev["csv"])
                s.series[ev["name"]] = parse_csv(csv, source_name=ev["name"])
            elif op == "query":
                q = parse_query(ev["query"])
                marks = _prior_bookmarks(s, ev["name"])
                tree = evaluate(q, s.series[ev["name"]], bookmarks=marks)
                _install_tree(s, ev["name"], q, tree)
            elif op == "bookmark":
                s.trees[ev["series"]].set_bookmark(ev["node"], ev["flag"])
            elif op == "label":
                s.trees[ev["series"]].label_node(ev["node"], ev["text"])
            elif op == "forward":
                _forward(s, ev["series"], ev["node"], ev["target"])
        except (SegtreeError, KeyError):
            pass  # a stale log line must not prevent startup


def _prior_bookmarks(session: Session, name: str) -> set[str]:
    prior = session.trees.get(name)
    return prior.bookmarked_ids() if prior else set()


def _install_tree(session: Session, name: str, query: QuerySpec, tree: SegmentTree) -> None:
    prior = session.trees.get(name)
    if prior is not None:
        carry_over(prior, tree)
    session.trees[name] = tree
    session.queries[name] = query


def _forward(session: Session, series_name: str, node_id: str, target: str) -> list[dict]:
    entry = {"series": series_name, "node_id": node_id}
    lst = session.forwarded[target]
    lst[:] = [e for e in lst if not (e["series"] == series_name and e["node_id"] == node_id)]
    lst.insert(0, entry)  # most recent first, deduplicated
    return lst


def create_app(store: SessionStore | None = None, max_upload_bytes: int | None = None,
               workers: int | None = None) -> FastAPI:
    if store is None:
        store = SessionStore(os.environ.get("SEGTREE_SESSION_LOG") or None)
    if max_upload_bytes is None:
        max_upload_bytes = int(os.environ.get("SEGTREE_MAX_UPLOAD_BYTES", DEFAULT_MAX_UPLOAD))
    if workers is None:
        workers = int(os.environ.get("SEGTREE_WORKERS", "4"))

    app = FastAPI(title="segtree", version="0.1.0")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    app.state.store = store

    @app.exception_handler(SegtreeError)
    async def _segtree_error(_req: Request, exc: SegtreeError):
        status = _STATUS.get(exc.code, 400)
        return JSONResponse(status_code=status, content=exc.payload())

    @app.exception_handler(Exception)
    async def _unexpected(_req: Request, exc: Exception):
        return JSONResponse(
            status_code=500, content={"code": "internal_error", "message": str(exc)}
        )

    def session_of(sid: str) -> Session:
        return store.get(sid)

    def series_of(session: Session, name: str) -> TimeSeries:
        try:
            return session.series[name]
        except KeyError:
            raise NotFound(f"no series {name!r} in session") from None

    def tree_of(session: Session, name: str) -> SegmentTree:
        tree = session.trees.get(name)
        if tree is None:
            raise Conflict(f"series {name!r} has no evaluated tree yet")
        return tree

    @app.post("/sessions")
    def create_session():
        s = store.create()
        return {"session_id": s.session_id}

    @app.get("/sessions/{sid}")
    def get_session(sid: str):
        s = session_of(sid)
        return {
            "session_id": s.session_id,
            "series": sorted(s.series),
            "forwarded": s.forwarded,
        }

    @app.post("/sessions/{sid}/series")
    async def upload_series(sid: str, request: Request, name: str = ""):
        s = session_of(sid)
        body = await request.body()
        if len(body) > max_upload_bytes:
            return JSONResponse(
                status_code=413,
                content={"code": "too_large", "message": f"upload exceeds {max_upload_bytes} bytes"},
            )
        series_name = name or f"series-{len(s.series) + 1}"
        ts = parse_csv(body, source_name=series_name)
        with s.lock:
            s.series[series_name] = ts
            s.caches[series_name] = {}
        store.log({"op": "upload", "session": sid, "name": series_name,
                   "csv": base64.b64encode(body).decode()})
        return ts.summary()

    @app.get("/sessions/{sid}/series")
    def list_series(sid: str):
        s = session_of(sid)
        return [s.series[k].summary() for k in sorted(s.series)]

    @app.post("/sessions/{sid}/series/{name}/query")
    async def run_query(sid: str, name: str, request: Request):
        s = session_of(sid)
        series = series_of(s, name)
        body = await request.body()
        query = parse_query(body.decode("utf-8"))
        query.validate_series(series)  # reject before evaluation starts
        cancel = threading.Event()
        with s.lock:
            s.cancels[name] = cancel
            s.progress[name] = {"status": "running", "levels_done": 0,
                                "levels_total": len(query.levels)}
        cache = s.caches.setdefault(name, {})

        def on_progress(done: int, total: int):
            s.progress[name] = {"status": "running", "levels_done": done, "levels_total": total}

        try:
            tree = evaluate(
                query, series, bookmarks=_prior_bookmarks(s, name),
                workers=workers, cache=cache, progress=on_progress, cancel=cancel,
            )
        except EvaluationCancelled:
            s.progress[name] = {"status": "cancelled", "levels_done": 0,
                                "levels_total": len(query.levels)}
            raise
        with s.lock:
            _install_tree(s, name, query, tree)
            s.progress[name] = {"status": "done", "levels_done": len(query.levels),
                                "levels_total": len(query.levels)}
        store.log({"op": "query", "session": sid, "name": name, "query": query.to_dict()})
        return Response(content=tree.to_json(), media_type="application/json")

    @app.get("/sessions/{sid}/series/{name}/progress")
    def query_progress(sid: str, name: str):
        s = session_of(sid)
        series_of(s, name)
        return s.progress.get(name, {"status": "idle", "levels_done": 0, "levels_total": 0})

    @app.post("/sessions/{sid}/series/{name}/cancel")
    def cancel_query(sid: str, name: str):
        s = session_of(sid)
        ev = s.cancels.get(name)
        if ev is not None:
            ev.set()
        return {"cancelled": ev is not None}

    @app.get("/sessions/{sid}/series/{name}/tree")
    def get_tree(sid: str, name: str):
        s = session_of(sid)
        series_of(s, name)
        return Response(content=tree_of(s, name).to_json(), media_type="application/json")

    @app.get("/sessions/{sid}/series/{name}/values")
    def get_values(sid: str, name: str, dimensions: str = "", from_: int | None = None,
                   to: int | None = None, max_points: int = 4000):
        """Raw values for plotting (pre-query dimension browsing)."""
        s = session_of(sid)
        series = series_of(s, name)
        lo = from_ or 1
        hi = to or series.n
        dims = [d for d in dimensions.split(",") if d] or [series.dimensions[0].name]
        return _values_payload(series, lo, hi, dims, max_points)

    @app.get("/sessions/{sid}/series/{name}/nodes/{node}/siblings")
    def get_siblings(sid: str, name: str, node: str, dimensions: str = ""):
        s = session_of(sid)
        series_of(s, name)
        tree = tree_of(s, name)
        parent = tree.parent_of(node)
        if parent is None:
            return []  # the root has no siblings
        dims = [d for d in dimensions.split(",") if d] or None
        return [sim.to_dict() for sim in sibling_distances(tree, parent.id, dims)]

    @app.post("/sessions/{sid}/series/{name}/nodes/{node}/forward")
    def forward_segment(sid: str, name: str, node: str, target: str = "temporal"):
        if target not in ("temporal", "geographic"):
            raise QueryError(f"target must be temporal or geographic, got {target!r}")
        s = session_of(sid)
        series_of(s, name)
        tree = tree_of(s, name)
        tree.node(node)  # 404 on unknown node
        with s.lock:
            lst = _forward(s, name, node, target)
        store.log({"op": "forward", "session": sid, "series": name, "node": node, "target": target})
        return {"target": target, "forwarded": lst}

    @app.get("/sessions/{sid}/forwarded")
    def forwarded(sid: str, target: str = "temporal"):
        s = session_of(sid)
        if target not in ("temporal", "geographic"):
            raise QueryError(f"target must be temporal or geographic, got {target!r}")
        return s.forwarded[target]

    @app.get("/sessions/{sid}/series/{name}/nodes/{node}/detail")
    def get_detail(sid: str, name: str, node: str, detectors: str = "",
                   dimensions: str = "", bins: int = 20, normalization: str = "absolute",
                   max_points: int = 4000, motif_length: int = 0, motif_top_k: int = 1,
                   mad_c: float = 3.0, lof_k: int = 10, lof_threshold: float = 1.5,
                   shesd_period: int = 24, shesd_alpha: float = 0.05,
                   shesd_max_anoms: float = 0.02, io_tc_decay: float = 0.7,
                   io_tc_threshold: float = 4.0):
        s = session_of(sid)
        series = series_of(s, name)
        tree = tree_of(s, name)
        seg = tree.node(node)
        dims = [d for d in dimensions.split(",") if d] or [series.dimensions[0].name]
        payload = _values_payload(series, seg.from_, seg.to, dims, max_points)
        payload["node"] = {"id": seg.id, "from": seg.from_, "to": seg.to,
                           "level": seg.level, "labels": seg.all_labels()}

        wanted = [d for d in detectors.split(",") if d]
        unknown = [d for d in wanted if d not in anomaly_mod.DETECTOR_NAMES]
        if unknown:
            raise QueryError(
                f"unknown detector(s) {unknown}; valid: {list(anomaly_mod.DETECTOR_NAMES)}"
            )
        params = {"mad_c": mad_c, "lof_k": lof_k, "lof_threshold": lof_threshold,
                  "shesd_period": shesd_period, "shesd_alpha": shesd_alpha,
                  "shesd_max_anoms": shesd_max_anoms, "io_tc_decay": io_tc_decay,
                  "io_tc_threshold": io_tc_threshold}
        target_dim = series.dimension(dims[0])
        if wanted and target_dim.kind == "categorical":
            raise QueryError(f"anomaly detection needs a numeric dimension, {dims[0]!r} is categorical")
        local = anomaly_mod.run_detectors(
            target_dim.values[seg.from_ - 1 : seg.to], wanted, params
        ) if wanted else []
        anomalies = [
            anomaly_mod.PointAnomaly(a.index + seg.from_ - 1, a.type, a.score) for a in local
        ]
        hist = anomaly_mod.aggregate(anomalies, seg.from_, seg.to, bins, normalization)
        payload["anomalies"] = [a.to_dict() for a in anomalies]
        payload["histogram"] = hist.to_dict()
        payload["overlay"] = anomaly_mod.density_overlay(anomalies, seg.from_, seg.to)
        if motif_length >= 2:
            payload["motifs"] = [
                {"from": a + seg.from_, "to": b + seg.from_ - 1}
                for a, b in motif_instances(
                    target_dim.values[seg.from_ - 1 : seg.to], motif_length, motif_top_k
                )
            ]
        return payload

    @app.post("/sessions/{sid}/series/{name}/nodes/{node}/bookmark")
    async def bookmark(sid: str, name: str, node: str, request: Request):
        s = session_of(sid)
        series_of(s, name)
        tree = tree_of(s, name)
        body = await _json_body(request)
        flag = bool(body.get("bookmarked", True))
        with s.lock:
            tree.set_bookmark(node, flag)
        store.log({"op": "bookmark", "session": sid, "series": name, "node": node, "flag": flag})
        return {"node_id": node, "bookmarked": flag}

    @app.post("/sessions/{sid}/series/{name}/nodes/{node}/label")
    async def label(sid: str, name: str, node: str, request: Request):
        s = session_of(sid)
        series_of(s, name)
        tree = tree_of(s, name)
        body = await _json_body(request)
        text = str(body.get("label", "")).strip()
        if not text:
            raise QueryError("label body needs a non-empty 'label'")
        with s.lock:
            tree.label_node(node, text)
        store.log({"op": "label", "session": sid, "series": name, "node": node, "text": text})
        return {"node_id": node, "labels": tree.node(node).all_labels()}

    @app.get("/sessions/{sid}/series/{name}/export")
    def export(sid: str, name: str, kind: str = "tree_csv"):
        s = session_of(sid)
        series_of(s, name)
        if kind == "tree_csv":
            data = export_tree_csv(tree_of(s, name))
            return Response(content=data, media_type="text/csv")
        if kind == "query_json":
            q = s.queries.get(name)
            if q is None:
                raise Conflict(f"series {name!r} has no evaluated query yet")
            return Response(content=q.to_json(), media_type="application/json")
        raise QueryError(f"kind must be tree_csv or query_json, got {kind!r}")

    return app


async def _json_body(request: Request) -> dict:
    try:
        body = await request.json()
    except Exception:
        raise QueryError("request body must be a JSON object") from None
    if not isinstance(body, dict):
        raise QueryError("request body must be a JSON object")
    return body


def _values_payload(series: TimeSeries, from_: int, to: int, dims: list[str], max_points: int):
    """Stride-downsampled values for display; indices stay global and 1-based."""
    view = series.view(from_, to)
    L = view.length
    stride = max(1, int(np.ceil(L / max_points))) if max_points and max_points > 0 else 1
    sel = np.arange(0, L, stride)
    out_dims = {}
    for d in dims:
        dim = view.dimension(d)
        if dim.kind == "categorical":
            cats = dim.categories or ()
            vals = [None if c < 0 else cats[c] for c in dim.values[sel]]
        else:
            vals = [None if np.isnan(v) else float(v) for v in dim.values[sel]]
        out_dims[d] = vals
    return {
        "from": from_,
        "to": to,
        "stride": stride,
        "indices": [int(i) + from_ for i in sel],
        "timestamps": [int(t) for t in view.t[sel]],
        "start_timestamp": iso_utc(int(view.t[0])),
        "dimensions": [
            {"name": d, "kind": series.dimension(d).kind} for d in dims
        ],
        "values": out_dims,
    }
