import time

import uvicorn
from fastapi import FastAPI, HTTPException, Request

from .checker import check_constraint
from .code_model import load_function
from .configs import CheckConfig, FclConfig
from .constraint_lang import Atom, normalize, params_of, parse_constraint, print_constraint
from .corpus import mutate as _mutate, validate_record
from .docstrings import parse_param_sections
from .fcl import constraint_similarity
from .logger import logger
from .models import (
    CheckRequest,
    DocstringRequest,
    DocstringResponse,
    MutateRequest,
    MutateResponse,
    ParseRequest,
    ParseResponse,
    SimilarityRequest,
    SimilarityResponse,
    Verdict,
)

app = FastAPI(
    title="cdicheck API",
    description="REST API for checking documented parameter constraints against code",
    version="0.1.0",
    docs_url="/api/py/docs",
    openapi_url="/api/py/openapi.json",
)


@app.middleware("http")
async def log_requests(request: Request, call_next):
    """Log all requests with timing information"""
    start_time = time.time()
    response = await call_next(request)
    duration = time.time() - start_time
    logger.info(
        f"{request.method} {request.url.path} "
        f"- Status: {response.status_code} "
        f"- Duration: {duration:.3f}s"
    )
    return response


def _status(e: Exception) -> int:
    return 400 if isinstance(e, (ValueError, SyntaxError)) else 500


@app.post("/constraints/parse", response_model=ParseResponse)
async def parse(request: ParseRequest) -> ParseResponse:
    """Parse constraint text into its canonical and normalized forms"""
    try:
        c = parse_constraint(request.text)
        return ParseResponse(
            canonical=print_constraint(c),
            params=list(params_of(c)),
            normalized=print_constraint(normalize(c)),
        )
    except Exception as e:
        logger.error(f"Constraint parsing failed: {str(e)}")
        raise HTTPException(status_code=_status(e), detail=str(e))


@app.post("/similarity", response_model=SimilarityResponse)
async def similarity(request: SimilarityRequest) -> SimilarityResponse:
    """Similarity of a constraint to an environment of atoms"""
    try:
        c = parse_constraint(request.constraint)
        env = []
        for text in request.environment:
            parsed = parse_constraint(text)
            if not isinstance(parsed, Atom):
                raise ValueError(f"Environment entries must be single comparisons: {text}")
            env.append(parsed.expr)
        cfg = FclConfig() if request.beta is None else FclConfig(beta=request.beta)
        return SimilarityResponse(similarity=constraint_similarity(c, env, cfg))
    except Exception as e:
        logger.error(f"Similarity failed: {str(e)}")
        raise HTTPException(status_code=_status(e), detail=str(e))


@app.post("/check", response_model=Verdict)
async def check(request: CheckRequest) -> Verdict:
    """Check one constraint against one function"""
    try:
        logger.info(f"Checking {request.constraint}")
        defaults = CheckConfig()
        cfg = CheckConfig(
            fuzzy_enabled=defaults.fuzzy_enabled if request.fuzzy is None else request.fuzzy,
            fcl=FclConfig() if request.tau is None else FclConfig(tau=request.tau),
        )
        c = parse_constraint(request.constraint)
        m = load_function(request.code, request.param_types)
        verdict = check_constraint(c, m, cfg)
        return verdict.model_copy(update={"function": m.name})
    except Exception as e:
        logger.error(f"Check failed: {str(e)}")
        raise HTTPException(status_code=_status(e), detail=str(e))


@app.post("/mutate", response_model=MutateResponse)
async def mutate(request: MutateRequest) -> MutateResponse:
    """Apply one mutation pattern to a corpus record"""
    try:
        mutant = _mutate(request.record, request.pattern, request.seed)
        return MutateResponse(record=mutant, validation=validate_record(request.record, mutant))
    except Exception as e:
        logger.error(f"Mutation failed: {str(e)}")
        raise HTTPException(status_code=_status(e), detail=str(e))


@app.post("/docstrings/parse", response_model=DocstringResponse)
async def docstrings(request: DocstringRequest) -> DocstringResponse:
    """Detect the docstring style and parse its parameter sections"""
    try:
        style, params = parse_param_sections(request.docstring)
        return DocstringResponse(style=style, params=params)
    except Exception as e:
        logger.error(f"Docstring parsing failed: {str(e)}")
        raise HTTPException(status_code=_status(e), detail=str(e))


def serve(host: str = "127.0.0.1", port: int = 8000) -> None:
    """Start the API server"""
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    serve()
