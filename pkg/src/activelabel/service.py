"""HTTP facade for human-in-the-loop labeling sessions.

Every mutation is persisted to the session's state file before it is
acknowledged, so a killed and restarted server replays to exactly the same
state. Partial label submissions are buffered server-side (and persisted);
training and next-round selection run synchronously once the pending batch
is fully answered. Ground-truth labels never cross the wire.
"""

from __future__ import annotations

import io
import json
import os
import re
import threading
from pathlib import Path

from fastapi import Body, FastAPI
from fastapi.responses import JSONResponse, PlainTextResponse, RedirectResponse
from fastapi.staticfiles import StaticFiles

from . import core, loop

STATE_DIR_ENV = "ACTIVELABEL_STATE_DIR"
STORE_VERSION = 1

_SESSION_FILE = re.compile(r"^(s\d{6})\.json$")


class ApiError(Exception):
    def __init__(self, status: int, code: str, detail: str):
        super().__init__(detail)
        self.status = status
        self.code = code
        self.detail = detail


class SessionStore:
    """Disk-backed session registry with per-session exclusive guards."""

    def __init__(self, state_dir):
        self.state_dir = Path(state_dir)
        self.state_dir.mkdir(parents=True, exist_ok=True)
        self._cache: dict[str, tuple[loop.SessionState, dict[int, int]]] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._guard = threading.Lock()

    def lock(self, session_id: str) -> threading.Lock:
        with self._guard:
            return self._locks.setdefault(session_id, threading.Lock())

    def path(self, session_id: str) -> Path:
        return self.state_dir / f"{session_id}.json"

    def list_ids(self) -> list[str]:
        ids = []
        for p in self.state_dir.iterdir():
            m = _SESSION_FILE.match(p.name)
            if m:
                ids.append(m.group(1))
        return sorted(ids)

    def next_session_id(self) -> str:
        with self._guard:
            taken = self.list_ids()
            n = int(taken[-1][1:]) + 1 if taken else 1
            return f"s{n:06d}"

    def save(self, state: loop.SessionState, buffer: dict[int, int]):
        payload = {
            "version": STORE_VERSION,
            "state": loop.state_to_dict(state),
            "buffer": {str(k): v for k, v in buffer.items()},
        }
        path = self.path(state.session_id)
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text(json.dumps(payload, sort_keys=True))
        os.replace(tmp, path)
        self._cache[state.session_id] = (state, dict(buffer))

    def load(self, session_id: str):
        if session_id in self._cache:
            return self._cache[session_id]
        path = self.path(session_id)
        if not path.is_file():
            return None
        payload = json.loads(path.read_text())
        if payload.get("version") != STORE_VERSION:
            raise ValueError(f"unsupported session file version {payload.get('version')!r}")
        state = loop.state_from_dict(payload["state"])
        buffer = {int(k): v for k, v in payload["buffer"].items()}
        self._cache[session_id] = (state, buffer)
        return state, buffer


def load_registry(data_dir) -> dict[str, core.Dataset]:
    """Datasets registered with the server: every *.json manifest in data_dir."""
    registry: dict[str, core.Dataset] = {}
    if data_dir is None:
        return registry
    for manifest in sorted(Path(data_dir).glob("*.json")):
        dataset = core.load_dataset(manifest)
        registry[dataset.name] = dataset
    return registry


def _api_session(state: loop.SessionState, dataset: core.Dataset, buffer) -> dict:
    pending = []
    for sid in state.pending_query:
        if sid in buffer:
            continue
        sample = dataset.by_id.get(sid)
        item: dict = {"sample_id": sid}
        if sample is not None and sample.display_ref:
            item["display_ref"] = sample.display_ref
        elif sample is not None:
            item["features"] = [float(v) for v in sample.features]
        pending.append(item)
    return {
        "session_id": state.session_id,
        "status": state.status,
        "round": state.current_round,
        "rounds_total": state.plan.rounds,
        "labeled_count": len(state.oracle_records()) + len(buffer),
        "budget": state.plan.total_budget,
        "class_names": [f"class {k}" for k in range(dataset.num_classes)],
        "pending": pending,
    }


def create_app(data_dir=None, state_dir=None, ui_dir=None, datasets=()) -> FastAPI:
    """Build the app over a dataset registry and a session state directory."""
    state_dir = state_dir or os.environ.get(STATE_DIR_ENV) or "./state"
    store = SessionStore(state_dir)
    registry = load_registry(data_dir)
    for ds in datasets:
        registry[ds.name] = ds

    app = FastAPI(title="activelabel", version="0.1.0")
    app.state.store = store
    app.state.registry = registry

    def fail(status: int, code: str, detail: str):
        raise ApiError(status, code, detail)

    @app.exception_handler(ApiError)
    async def _api_error(_, exc: ApiError):
        return JSONResponse(status_code=exc.status, content={"error": exc.code, "detail": exc.detail})

    def get_session(session_id: str):
        found = store.load(session_id)
        if found is None:
            fail(404, "unknown_session", f"no session {session_id!r}")
        state, buffer = found
        dataset = registry.get(state.config.dataset)
        if dataset is None:
            fail(404, "unknown_dataset", f"dataset {state.config.dataset!r} is not registered")
        return state, buffer, dataset

    @app.get("/datasets")
    def list_datasets():
        return [
            {"name": ds.name, "num_classes": ds.num_classes, "dim": ds.dim, "size": len(ds)}
            for ds in registry.values()
        ]

    @app.get("/sessions")
    def list_sessions():
        out = []
        for sid in store.list_ids():
            state, buffer, dataset = get_session(sid)
            view = _api_session(state, dataset, buffer)
            del view["pending"]
            out.append(view)
        return out

    @app.post("/sessions", status_code=201)
    def create_session(body: dict = Body(...)):
        try:
            config = loop.config_from_dict(body)
        except (loop.SessionError, ValueError, TypeError) as exc:
            fail(400, "invalid_config", str(exc))
        dataset = registry.get(config.dataset)
        if dataset is None:
            fail(404, "unknown_dataset", f"dataset {config.dataset!r} is not registered")
        session_id = store.next_session_id()
        try:
            state = loop.start_session(config, dataset, session_id=session_id)
        except loop.BudgetExceedsPoolError as exc:
            fail(400, "budget_exceeds_pool", str(exc))
        except (loop.SessionError, ValueError) as exc:
            fail(400, "invalid_config", str(exc))
        store.save(state, {})
        return _api_session(state, dataset, {})

    @app.get("/sessions/{session_id}")
    def get_session_view(session_id: str):
        state, buffer, dataset = get_session(session_id)
        return _api_session(state, dataset, buffer)

    @app.get("/sessions/{session_id}/query")
    def get_query(session_id: str):
        state, buffer, dataset = get_session(session_id)
        view = _api_session(state, dataset, buffer)
        return {
            "session_id": session_id,
            "status": view["status"],
            "round": view["round"],
            "pending": view["pending"],
        }

    @app.post("/sessions/{session_id}/labels")
    def post_labels(session_id: str, body: list = Body(...)):
        with store.lock(session_id):
            state, buffer, dataset = get_session(session_id)
            if state.status == loop.STATUS_COMPLETE:
                fail(409, "session_complete", "session already complete")
            if not isinstance(body, list) or not body:
                fail(400, "invalid_body", "expected a nonempty list of {sample_id, class_id}")
            pending = set(state.pending_query)
            incoming: dict[int, int] = {}
            for entry in body:
                if not isinstance(entry, dict) or set(entry) != {"sample_id", "class_id"}:
                    fail(400, "invalid_body", "each entry needs exactly sample_id and class_id")
                sid, cls = entry["sample_id"], entry["class_id"]
                if not isinstance(sid, int) or isinstance(sid, bool):
                    fail(400, "invalid_body", "sample_id must be an integer")
                if not isinstance(cls, int) or isinstance(cls, bool):
                    fail(422, "class_out_of_range", "class_id must be an integer")
                if sid not in dataset.by_id:
                    fail(404, "unknown_sample", f"no sample {sid}")
                if sid not in pending:
                    fail(409, "not_pending", f"sample {sid} is not awaiting a label")
                if sid in buffer or sid in incoming:
                    fail(409, "already_answered", f"sample {sid} already has a buffered label")
                if not 0 <= cls < dataset.num_classes:
                    fail(422, "class_out_of_range", f"class {cls} out of range")
                incoming[sid] = cls

            merged = {**buffer, **incoming}
            if set(merged) == pending:
                answers = [(sid, merged[sid]) for sid in state.pending_query]
                try:
                    new_state = loop.submit_labels(state, dataset, answers, source="human")
                except loop.SessionError as exc:
                    fail(409, "submit_rejected", str(exc))
                store.save(new_state, {})
                return _api_session(new_state, dataset, {})
            store.save(state, merged)
            return _api_session(state, dataset, merged)

    @app.get("/sessions/{session_id}/metrics")
    def get_metrics(session_id: str):
        state, _, _ = get_session(session_id)
        return {
            "session_id": session_id,
            "status": state.status,
            "round": state.current_round,
            "initial": loop._metrics_to_dict(state.initial_metrics),
            "history": [loop._metrics_to_dict(m) for m in state.history],
        }

    @app.get("/sessions/{session_id}/export")
    def export_labels(session_id: str):
        state, _, dataset = get_session(session_id)
        buf = io.StringIO()
        feature_cols = ",".join(f"f_{j + 1}" for j in range(dataset.dim))
        buf.write(f"id,{feature_cols},label,round,source,status\n")
        for rec in state.oracle_records():
            feats = ",".join(repr(float(v)) for v in dataset.by_id[rec.sample_id].features)
            buf.write(f"{rec.sample_id},{feats},{rec.label},{rec.round},{rec.source},{state.status}\n")
        return PlainTextResponse(
            buf.getvalue(),
            media_type="text/csv",
            headers={"Content-Disposition": f'attachment; filename="{session_id}_labels.csv"'},
        )

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

        @app.get("/")
        def index():
            return RedirectResponse(url="/ui/")

    return app
