"""FastAPI transport over the endpoint handlers.

Package errors map to HTTP 400 with a machine-readable body; request
validation errors surface as FastAPI's standard 422 responses.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import ShiftLabError
from . import handlers
from . import schemas as sc


def create_app() -> FastAPI:
    app = FastAPI(
        title="shiftlab",
        version=__version__,
        description="Closed-form and Monte-Carlo risk laboratory for two-group "
        "Gaussian models under silent-feature shift.",
    )

    @app.exception_handler(ShiftLabError)
    async def _package_error(_: Request, exc: ShiftLabError) -> JSONResponse:
        return JSONResponse(
            status_code=400,
            content=sc.ErrorResponse(error=type(exc).__name__, detail=str(exc)).model_dump(),
        )

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.get("/defaults", response_model=sc.DefaultsResponse)
    def defaults() -> sc.DefaultsResponse:
        return handlers.handle_defaults()

    @app.post("/generate", response_model=sc.GenerateResponse)
    def generate(req: sc.GenerateRequest) -> sc.GenerateResponse:
        return handlers.handle_generate(req)

    @app.post("/risk-sweep", response_model=sc.SweepResponse)
    def risk_sweep(req: sc.SweepRequest) -> sc.SweepResponse:
        return handlers.handle_sweep(req)

    @app.post("/mc-check", response_model=sc.McCheckResponse)
    def mc_check(req: sc.McCheckRequest) -> sc.McCheckResponse:
        return handlers.handle_mc_check(req)

    @app.post("/train", response_model=sc.TrainResponse)
    def train_model(req: sc.TrainRequest) -> sc.TrainResponse:
        return handlers.handle_train(req)

    @app.post("/experiment", response_model=sc.ExperimentResponse)
    def experiment(req: sc.ExperimentRequest) -> sc.ExperimentResponse:
        return handlers.handle_experiment(req)

    @app.post("/grid-select", response_model=sc.GridSelectResponse)
    def grid_select_endpoint(req: sc.GridSelectRequest) -> sc.GridSelectResponse:
        return handlers.handle_grid_select(req)

    @app.post("/demo-fig3", response_model=sc.Fig3Response)
    def fig3(req: sc.Fig3Request) -> sc.Fig3Response:
        return handlers.handle_fig3(req)

    return app


app = create_app()
