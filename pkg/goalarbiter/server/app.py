"""
The REST interface of the knowledge base: upload the environment, set goals and
sensor readings, manage policies and trigger reactions.

Every error is answered with {"code", "message", "details"} and a status chosen
from the class of the GoalArbiterError raised. Routing errors keep their HTTP
status and anything unexpected becomes a 500 with code "internal-error".
"""

from __future__ import annotations

import json
import logging
from http import HTTPStatus
from typing import Any

from fastapi import APIRouter, Depends, FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field
from starlette.exceptions import HTTPException as StarletteHTTPException

from goalarbiter.definitions import PolicyKind
from goalarbiter.errors import (
    GoalArbiterError,
    ModelFormatError,
    NoModelError,
    PolicyEvaluationError,
    UnknownPolicyError,
    UnknownSensorError,
    ValidationError,
)
from goalarbiter.model import Goal

from .session import ApiSession

logger = logging.getLogger(__name__)

router = APIRouter()


class UnsupportedMediaTypeError(GoalArbiterError):
    code = "unsupported-media-type"


# First match wins, so subclasses come before their bases
STATUS_CODES: list[tuple[type[GoalArbiterError], int]] = [
    (NoModelError, 409),
    (UnknownSensorError, 404),
    (UnknownPolicyError, 404),
    (UnsupportedMediaTypeError, 415),
    (ValidationError, 422),
    (PolicyEvaluationError, 422),
    (GoalArbiterError, 400),
]


def status_for(exc: GoalArbiterError) -> int:
    return next(status for cls, status in STATUS_CODES if isinstance(exc, cls))


class GoalKey(BaseModel):
    user: str = Field(min_length=1)
    zone: str = Field(min_length=1)
    instance: str = Field(min_length=1)


class GoalBody(GoalKey):
    value: float = Field(allow_inf_nan=False)


class SensorBody(BaseModel):
    value: float = Field(allow_inf_nan=False)


class ContextBody(BaseModel):
    season: str | None = None
    facts: dict[str, bool | int | float | str] = {}


class DefaultsBody(BaseModel):
    mediation: str | None = None
    actuation: str | None = None


class ValidationBindingBody(BaseModel):
    policy: str = Field(min_length=1)


class RevisionResponse(BaseModel):
    revision: int


def get_session(request: Request) -> ApiSession:
    return request.app.state.session


def _media_type(request: Request) -> str:
    return request.headers.get("content-type", "").split(";")[0].strip().lower()


def require_json(request: Request) -> None:
    if _media_type(request) != "application/json":
        raise UnsupportedMediaTypeError("request body must be application/json")


def require_text(request: Request) -> None:
    if _media_type(request) != "text/plain":
        raise UnsupportedMediaTypeError("policy source must be sent as text/plain")


def _reject_constant(name: str):
    raise ValueError(f"{name} is not a valid JSON number")


def _policy_kind(kind: str) -> PolicyKind:
    try:
        return PolicyKind(kind)
    except ValueError:
        raise UnknownPolicyError(
            f"unknown policy kind '{kind}'", [{"kind": kind, "expected": [x.value for x in PolicyKind]}]
        ) from None


@router.get("/health")
def health(session: ApiSession = Depends(get_session)) -> dict[str, Any]:
    return {"status": "ok", "revision": session.revision}


@router.put("/model", response_model=RevisionResponse, dependencies=[Depends(require_json)])
async def put_model(request: Request, session: ApiSession = Depends(get_session)) -> RevisionResponse:
    raw = await request.body()
    try:
        document = json.loads(raw, parse_constant=_reject_constant)
    except (ValueError, UnicodeDecodeError) as exc:
        details = [{"line": exc.lineno, "column": exc.colno}] if isinstance(exc, json.JSONDecodeError) else []
        raise ModelFormatError(f"body is not valid JSON: {exc}", details) from exc

    revision = session.knowledge_base.replace_model(document)
    return RevisionResponse(revision=revision)


@router.get("/model")
def get_model(session: ApiSession = Depends(get_session)) -> dict[str, Any]:
    document, revision = session.knowledge_base.dump()
    return {"revision": revision, "model": document}


@router.post("/goals", response_model=RevisionResponse, dependencies=[Depends(require_json)])
def post_goal(body: GoalBody, session: ApiSession = Depends(get_session)) -> RevisionResponse:
    goal = Goal(body.user, body.zone, body.instance, body.value)
    return RevisionResponse(revision=session.knowledge_base.set_goal(goal))


@router.delete("/goals", response_model=RevisionResponse, dependencies=[Depends(require_json)])
def delete_goal(body: GoalKey, session: ApiSession = Depends(get_session)) -> RevisionResponse:
    return RevisionResponse(revision=session.knowledge_base.remove_goal(body.user, body.zone, body.instance))


@router.post("/sensors/{sensor_id}", response_model=RevisionResponse, dependencies=[Depends(require_json)])
def post_sensor(sensor_id: str, body: SensorBody, session: ApiSession = Depends(get_session)) -> RevisionResponse:
    return RevisionResponse(revision=session.knowledge_base.update_sensor(sensor_id, body.value))


@router.put("/context", response_model=RevisionResponse, dependencies=[Depends(require_json)])
def put_context(body: ContextBody, session: ApiSession = Depends(get_session)) -> RevisionResponse:
    if "season" in body.facts:
        raise ModelFormatError("the season is set with the 'season' field, not as a fact")
    return RevisionResponse(revision=session.knowledge_base.set_context(body.season, **body.facts))


@router.get("/policies")
def get_policies(session: ApiSession = Depends(get_session)) -> dict[str, Any]:
    registry, revision = session.knowledge_base.registry_view()
    return {"revision": revision, **registry.describe()}


@router.get("/policies/{kind}/{name}")
def get_policy(kind: str, name: str, session: ApiSession = Depends(get_session)) -> dict[str, Any]:
    registry, _ = session.knowledge_base.registry_view()
    return registry.require(_policy_kind(kind), name).describe()


@router.put("/policies/{kind}/{name}", response_model=RevisionResponse, dependencies=[Depends(require_text)])
async def put_policy(
    kind: str, name: str, request: Request, session: ApiSession = Depends(get_session)
) -> RevisionResponse:
    policy_kind = _policy_kind(kind)
    raw = await request.body()
    try:
        source = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise UnsupportedMediaTypeError("policy source must be UTF-8 text") from exc
    return RevisionResponse(revision=session.upload_policy(policy_kind, name, source))


@router.put("/defaults", response_model=RevisionResponse, dependencies=[Depends(require_json)])
def put_defaults(body: DefaultsBody, session: ApiSession = Depends(get_session)) -> RevisionResponse:
    return RevisionResponse(revision=session.knowledge_base.set_defaults(body.mediation, body.actuation))


@router.put("/validation/{zone_id}", response_model=RevisionResponse, dependencies=[Depends(require_json)])
def put_validation(
    zone_id: str, body: ValidationBindingBody, session: ApiSession = Depends(get_session)
) -> RevisionResponse:
    return RevisionResponse(revision=session.knowledge_base.bind_validation(zone_id, body.policy))


@router.post("/react")
def post_react(dispatch: bool = False, session: ApiSession = Depends(get_session)) -> JSONResponse:
    return JSONResponse(session.react(dispatch=dispatch))


async def handle_error(request: Request, exc: GoalArbiterError) -> JSONResponse:
    status = status_for(exc)
    if status >= 422:
        logger.warning("%s %s failed with %s: %s", request.method, request.url.path, exc.code, exc.message)
    else:
        logger.debug("%s %s rejected with %s: %s", request.method, request.url.path, exc.code, exc.message)
    return JSONResponse(exc.to_dict(), status_code=status)


async def handle_invalid_body(request: Request, exc: RequestValidationError) -> JSONResponse:
    details = [{"loc": list(x.get("loc", ())), "msg": x.get("msg"), "type": x.get("type")} for x in exc.errors()]
    body = {"code": "invalid-body", "message": "request body is not valid", "details": details}
    return JSONResponse(body, status_code=400)


async def handle_http_error(request: Request, exc: StarletteHTTPException) -> JSONResponse:
    phrase = HTTPStatus(exc.status_code).phrase
    message = exc.detail if isinstance(exc.detail, str) else phrase
    body = {"code": phrase.lower().replace(" ", "-"), "message": message, "details": []}
    return JSONResponse(body, status_code=exc.status_code, headers=exc.headers)


async def handle_unexpected(request: Request, exc: Exception) -> JSONResponse:
    logger.exception("%s %s failed unexpectedly", request.method, request.url.path)
    body = {"code": "internal-error", "message": f"internal error: {type(exc).__name__}", "details": []}
    return JSONResponse(body, status_code=500)


def create_app(session: ApiSession | None = None) -> FastAPI:
    """Build the application serving one session"""
    app = FastAPI(title="goalarbiter", description="Goal mediation for smart environments")
    app.state.session = session if session is not None else ApiSession()
    app.include_router(router)
    app.add_exception_handler(GoalArbiterError, handle_error)
    app.add_exception_handler(RequestValidationError, handle_invalid_body)
    app.add_exception_handler(StarletteHTTPException, handle_http_error)
    app.add_exception_handler(Exception, handle_unexpected)
    return app
