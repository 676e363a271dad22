"""
FastAPI application exposing the GermCalc commands over HTTP.

Every command accepts the same arguments as the CLI and answers with the same
CommandReport JSON. Usage, parse and precondition errors map to 422.
"""

from contextlib import asynccontextmanager
from datetime import datetime
from typing import Dict

from fastapi import FastAPI, HTTPException, status
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from src import __version__
from src.cli import COMMANDS, run
from src.config import get_config
from src.logging_config import configure_logging, get_structured_logger
from src.models import CommandReport, CommandRequest, ErrorResponse, HealthCheck

logger = get_structured_logger(__name__)

metrics = {"total_commands": 0, "total_errors": 0}


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Configure logging on startup."""
    configure_logging()
    config = get_config()
    logger.info("app.startup", version=__version__, environment=config.environment)
    yield
    logger.info("app.shutdown", **metrics)


app = FastAPI(
    title="GermCalc API",
    description="Exact calculus for germs of singular holomorphic foliations",
    version=__version__,
    lifespan=lifespan,
)

ALLOWED_ORIGINS = ["*"] if get_config().environment == "development" else []

app.add_middleware(
    CORSMiddleware,
    allow_origins=ALLOWED_ORIGINS,
    allow_methods=["GET", "POST"],
    allow_headers=["Content-Type"],
    max_age=3600,
)


# ============================================================================
# Health & Status Endpoints
# ============================================================================

@app.get("/api/health", response_model=HealthCheck, tags=["System"])
async def health_check():
    """Service health and the effective engine settings."""
    config = get_config()
    return HealthCheck(
        status="healthy",
        timestamp=datetime.now(),
        version=__version__,
        settings={
            "environment": config.environment,
            "max_cyclotomic": config.max_cyclotomic,
            "default_order": config.default_order,
            "default_vars": config.default_vars,
            "float_tolerance": config.float_tolerance,
        },
    )


@app.get("/", tags=["System"])
async def root():
    """Root endpoint with API information."""
    return {
        "name": "GermCalc API",
        "version": __version__,
        "status": "operational",
        "docs": "/docs",
        "health": "/api/health",
    }


# ============================================================================
# Command Endpoints
# ============================================================================

@app.get("/api/commands", tags=["Commands"])
async def list_commands() -> Dict[str, str]:
    """Available commands with one-line descriptions."""
    return {name: text for name, (text, _) in COMMANDS.items()}


@app.post(
    "/api/commands/{command}",
    response_model=CommandReport,
    responses={422: {"model": ErrorResponse}},
    tags=["Commands"],
)
def run_command(command: str, request: CommandRequest):
    """Run one command with CLI-style arguments; same report as `germcalc <command> --json`."""
    if command not in COMMANDS:
        raise HTTPException(status_code=status.HTTP_404_NOT_FOUND, detail=f"unknown command '{command}'")
    metrics["total_commands"] += 1
    try:
        code, report, _ = run([command, *request.args])
    except SystemExit:
        # argparse --help
        code, report = 2, ErrorResponse(error="usage", message="help requested; see GET /api/commands")
    if isinstance(report, ErrorResponse):
        metrics["total_errors"] += 1
        logger.info("app.command.rejected", command=command, error=report.error)
        return JSONResponse(
            status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
            content=report.model_dump(mode="json"),
        )
    logger.info("app.command", command=command, exit_code=code)
    return report
