"""Service layer: pydantic schemas, handlers, and the FastAPI app.

Import `matcorr.service.app` for the ASGI application; the CLI talks to
`matcorr.service.handlers` directly so it never pays the web-stack import
cost for local runs.
"""
