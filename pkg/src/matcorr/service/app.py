"""FastAPI application exposing the verification, certificate-checking and
optimization operations; run with `uvicorn matcorr.service.app:app`."""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from . import handlers
from .schemas import (
    CertificateCheckRequest,
    CertificateCheckResponse,
    EmbedCheckRequest,
    EmbedCheckResponse,
    MetaResponse,
    OptimizeRequest,
    OptimizeResponse,
    VerifyRequest,
    VerifyResponse,
    WitnessResponse,
)


def create_app() -> FastAPI:
    app = FastAPI(title="matcorr",
                  description="Matrix-valued quantum correlation witnesses: "
                              "exact verification, certificate checking and "
                              "finite-dimensional defect sweeps.")

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.get("/meta", response_model=MetaResponse)
    def meta() -> MetaResponse:
        return handlers.meta()

    @app.post("/verify", response_model=VerifyResponse)
    def verify(req: VerifyRequest) -> VerifyResponse:
        return handlers.run_verify(req)

    @app.post("/embed-check", response_model=EmbedCheckResponse)
    def embed_check(req: EmbedCheckRequest) -> EmbedCheckResponse:
        try:
            return handlers.run_embed_check(req)
        except handlers.ResourceFailure as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc

    @app.post("/certificate-check", response_model=CertificateCheckResponse)
    def certificate_check(req: CertificateCheckRequest) -> CertificateCheckResponse:
        try:
            return handlers.run_certificate_check(req)
        except handlers.ServiceFailure as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc

    @app.post("/optimize", response_model=OptimizeResponse)
    def optimize(req: OptimizeRequest) -> OptimizeResponse:
        return handlers.run_optimize(req)

    @app.get("/witness/{witness_id}", response_model=WitnessResponse)
    def witness(witness_id: str) -> WitnessResponse:
        try:
            return handlers.witness_export(witness_id)
        except handlers.ServiceFailure as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc

    return app


app = create_app()
