"""HTTP interface over one precomputed session.

A small FastAPI app with a single global session: dataset metadata,
the current selection, selection geometry, selector series and
highlight lookups.  Responses are rendered once into canonical JSON
bytes (sorted keys, compact separators) and cached per configuration,
so identical requests return identical bytes.
"""

from __future__ import annotations

import json
from typing import Dict, List, Optional, Tuple

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import Response

from .analysis import MEASURES, MODES, selector_series
from .cache import PrecomputedSession
from .dataset_io import DataError
from .export import build_selection_geometry, canonical_json_bytes

DEFAULT_PORT = 7878
SELECTION_MODES = ("window", "multi", "periodic")


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


def _json_response(payload, status: int = 200) -> Response:
    return Response(
        content=canonical_json_bytes(payload),
        status_code=status,
        media_type="application/json",
    )


class Session:
    """Mutable serving state wrapped around a precomputed session."""

    def __init__(self, pre: PrecomputedSession):
        self.pre = pre
        self.steps = len(pre.alignment.aligned_steps)
        self.compact_gaps = False
        self.equal_spacing = False
        self._geometry_cache: Dict[str, bytes] = {}
        self._selector_cache: Dict[Tuple[str, str, int], bytes] = {}
        center = (self.steps - 1) // 2
        self.mode = "window"
        self.params: Dict = {"center": center, "width": 5}
        self.members = self._resolve("window", self.params)

    # -- selection ------------------------------------------------------

    def _resolve(self, mode: str, params: Dict) -> List[int]:
        last = self.steps - 1
        if mode == "window":
            center = _require_int(params, "center")
            width = _require_int(params, "width")
            if width < 1:
                raise ApiError(422, "invalid_selection", "window width must be >= 1")
            if not 0 <= center <= last:
                raise ApiError(422, "invalid_selection", f"center {center} outside 0..{last}")
            half = width // 2
            return list(range(max(0, center - half), min(last, center + half) + 1))
        if mode == "multi":
            raw = params.get("steps")
            if not isinstance(raw, list) or not raw:
                raise ApiError(422, "invalid_selection", "multi selection needs a step list")
            try:
                steps = sorted({int(s) for s in raw})
            except (TypeError, ValueError):
                raise ApiError(422, "invalid_selection", "steps must be integers")
            bad = [s for s in steps if not 0 <= s <= last]
            if bad:
                raise ApiError(422, "invalid_selection", f"steps {bad} outside 0..{last}")
            return steps
        if mode == "periodic":
            anchor = _require_int(params, "anchor")
            period = _require_int(params, "period")
            if period < 1:
                raise ApiError(422, "invalid_selection", "period must be >= 1")
            if not 0 <= anchor < period:
                raise ApiError(422, "invalid_selection", "anchor must be in 0..period-1")
            members = [t for t in range(self.steps) if t % period == anchor]
            if not members:
                raise ApiError(422, "invalid_selection", "periodic selection is empty")
            return members
        raise ApiError(422, "invalid_selection", f"unknown selection mode '{mode}'")

    def set_selection(self, mode: str, params: Dict, compact_gaps: bool, equal_spacing: bool) -> None:
        members = self._resolve(mode, params)
        self.mode = mode
        self.params = dict(params)
        self.members = members
        self.compact_gaps = compact_gaps
        self.equal_spacing = equal_spacing

    def shift(self, direction: int) -> None:
        if direction not in (-1, 1):
            raise ApiError(422, "invalid_shift", "direction must be -1 or 1")
        moved = [t + direction for t in self.members]
        if moved[0] < 0 or moved[-1] >= self.steps:
            raise ApiError(409, "out_of_range", "selection would leave the time range")
        self.members = moved
        if self.mode == "window":
            self.params["center"] = self.params["center"] + direction
        elif self.mode == "periodic":
            self.params["anchor"] = (self.params["anchor"] + direction) % self.params["period"]
        else:
            self.params["steps"] = moved

    def selection_echo(self) -> Dict:
        return {"mode": self.mode, "params": self.params, "members": self.members}

    # -- payloads ---------------------------------------------------------

    def geometry_bytes(self) -> bytes:
        key = canonical_json_bytes(
            {
                "members": self.members,
                "mode": self.mode,
                "params": self.params,
                "compact": self.compact_gaps,
                "spacing": self.equal_spacing,
            }
        ).decode()
        hit = self._geometry_cache.get(key)
        if hit is not None:
            return hit
        payload = build_selection_geometry(
            self.pre.alignment,
            self.pre.layout,
            self.selection_echo(),
            compact_gaps=self.compact_gaps,
            equal_spacing=self.equal_spacing,
        )
        data = canonical_json_bytes(payload)
        self._geometry_cache[key] = data
        return data

    def selector_bytes(self, measure: str, mode: str, window: int) -> bytes:
        key = (measure, mode, window)
        hit = self._selector_cache.get(key)
        if hit is not None:
            return hit
        series = selector_series(self.pre.alignment, measure, mode, window)
        data = canonical_json_bytes(
            {
                "measure": series.measure,
                "mode": series.mode,
                "window": series.window,
                "values": series.values,
                "raw": series.raw,
            }
        )
        self._selector_cache[key] = data
        return data

    def dataset_payload(self) -> Dict:
        return {
            "steps": self.steps,
            "width": self.pre.width,
            "height": self.pre.height,
            "labels": self.pre.labels,
            "value_range": [
                self.pre.alignment.value_range[0],
                self.pre.alignment.value_range[1],
            ],
            "selection": self.selection_echo(),
        }


def _require_int(params: Dict, key: str) -> int:
    if key not in params:
        raise ApiError(422, "invalid_selection", f"missing parameter '{key}'")
    value = params[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ApiError(422, "invalid_selection", f"parameter '{key}' must be an integer")
    return value


def create_app(session: Optional[Session] = None) -> FastAPI:
    app = FastAPI(title="tfct service", docs_url=None, redoc_url=None)
    app.state.session = session
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(ApiError)
    async def _api_error(_req: Request, exc: ApiError):
        return _json_response({"code": exc.code, "message": exc.message}, exc.status)

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_req: Request, exc: RequestValidationError):
        return _json_response(
            {"code": "invalid_request", "message": str(exc.errors()[:1])}, 422
        )

    @app.exception_handler(DataError)
    async def _data_error(_req: Request, exc: DataError):
        return _json_response({"code": "data_error", "message": str(exc)}, 500)

    def need_session() -> Session:
        if app.state.session is None:
            raise ApiError(404, "no_dataset", "no dataset has been loaded")
        return app.state.session

    @app.get("/api/dataset")
    async def dataset():
        return _json_response(need_session().dataset_payload())

    @app.post("/api/selection")
    async def set_selection(body: Dict):
        sess = need_session()
        mode = body.get("mode")
        if mode not in SELECTION_MODES:
            raise ApiError(422, "invalid_selection", f"mode must be one of {SELECTION_MODES}")
        params = body.get("params", {})
        if not isinstance(params, dict):
            raise ApiError(422, "invalid_selection", "params must be an object")
        compact = bool(body.get("compact_gaps", sess.compact_gaps))
        spacing = bool(body.get("equal_spacing", sess.equal_spacing))
        sess.set_selection(mode, params, compact, spacing)
        return Response(content=sess.geometry_bytes(), media_type="application/json")

    @app.post("/api/selection/shift")
    async def shift_selection(body: Dict):
        sess = need_session()
        direction = body.get("direction")
        if not isinstance(direction, int) or isinstance(direction, bool):
            raise ApiError(422, "invalid_shift", "direction must be an integer")
        sess.shift(direction)
        return Response(content=sess.geometry_bytes(), media_type="application/json")

    @app.get("/api/selection")
    async def get_selection():
        sess = need_session()
        return Response(content=sess.geometry_bytes(), media_type="application/json")

    @app.get("/api/selector")
    async def selector(measure: str = "degree", mode: str = "direct", window: int = 5):
        sess = need_session()
        if measure not in MEASURES:
            raise ApiError(422, "invalid_selector", f"measure must be one of {MEASURES}")
        if mode not in MODES:
            raise ApiError(422, "invalid_selector", f"mode must be one of {MODES}")
        if window < 1:
            raise ApiError(422, "invalid_selector", "window must be >= 1")
        return Response(
            content=sess.selector_bytes(measure, mode, window),
            media_type="application/json",
        )

    @app.get("/api/highlight/tree/{t}")
    async def highlight_tree(t: int):
        sess = need_session()
        if not 0 <= t < sess.steps:
            raise ApiError(404, "unknown_step", f"step {t} outside 0..{sess.steps - 1}")
        if t in sess.members:
            payload = json.loads(sess.geometry_bytes())
            member = next(m for m in payload["members"] if m["t"] == t)
            return _json_response({"kind": "full", "t": t, "member": member})
        keys = [
            key
            for key in sorted(sess.pre.layout.branches)
            if t in sess.pre.alignment.nodes[key].members
        ]
        return _json_response({"kind": "branches", "t": t, "branches": keys})

    @app.get("/api/highlight/branch/{branch_id}")
    async def highlight_branch(branch_id: int):
        sess = need_session()
        if branch_id not in sess.pre.layout.branches:
            raise ApiError(404, "unknown_branch", f"no branch keyed by node {branch_id}")
        present = sorted(sess.pre.alignment.nodes[branch_id].members)
        return _json_response({"branch": branch_id, "present_at": present})

    return app
