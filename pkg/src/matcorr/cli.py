"""Command-line client for the verification and optimization service.

All computation lives in the service layer; this module parses flags (plus
an optional JSON config file with the same schema, flags taking
precedence), invokes the handlers in process or POSTs to a running server
when --server is given, and renders the responses.

Exit codes: 0 pass/success, 1 verification failure or resource cap,
2 usage/parse errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .service import handlers
from .service.schemas import (
    CertificateCheckRequest,
    CertificateCheckResponse,
    EmbedCheckRequest,
    EmbedCheckResponse,
    OptimizeRequest,
    OptimizeResponse,
    VerifyRequest,
    VerifyResponse,
)

USAGE_ERROR, VERIFY_FAILURE, OK = 2, 1, 0

_CONFIG_KEYS = {
    "command", "target", "backend", "window", "witness", "dims", "restarts",
    "seed", "max_iters", "include_warm", "length", "exp", "cap", "table",
    "out", "format", "server",
}


class UsageError(Exception):
    pass


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="matcorr",
        description="Exact witnesses for matrix-valued quantum correlations: "
                    "verify identities, check certificates, measure "
                    "finite-dimensional defects.")
    parser.add_argument("--format", choices=("text", "json"), default=None,
                        help="output rendering (default text)")
    parser.add_argument("--config", default=None,
                        help="JSON config file with the same keys as the flags")
    parser.add_argument("--server", default=None,
                        help="base URL of a running service; defaults to in-process")
    parser.add_argument("--out", default=None,
                        help="output path (CSV for optimize, JSON otherwise)")
    sub = parser.add_subparsers(dest="command")

    p_verify = sub.add_parser("verify", help="verify one named identity suite")
    p_verify.add_argument("target", nargs="?", default=None,
                          choices=("prop15", "thm21", "lemma32", "thm33"))
    p_verify.add_argument("--backend", choices=("exact", "cyclic"), default=None)
    p_verify.add_argument("--window", type=int, default=None,
                          help="cyclic window size M (cyclic backend)")

    p_embed = sub.add_parser("embed-check",
                             help="enumerative injectivity check of the group embedding")
    p_embed.add_argument("--length", type=int, default=None)
    p_embed.add_argument("--exp", type=int, default=None)
    p_embed.add_argument("--cap", type=int, default=None)

    p_cert = sub.add_parser("certificate-check",
                            help="re-check an exported correlation table file")
    p_cert.add_argument("table", nargs="?", default=None,
                        help="path to a CorrelationTable JSON file")
    p_cert.add_argument("--witness", choices=("32", "23"), default=None)

    p_opt = sub.add_parser("optimize", help="finite-dimensional defect sweep")
    p_opt.add_argument("--witness", choices=("32", "23"), default=None)
    p_opt.add_argument("--dims", default=None, help="e.g. 2x2,3x3,4x4")
    p_opt.add_argument("--restarts", type=int, default=None)
    p_opt.add_argument("--seed", type=int, default=None)
    p_opt.add_argument("--max-iters", dest="max_iters", type=int, default=None)
    p_opt.add_argument("--no-warm", dest="include_warm", action="store_false",
                       default=None)
    return parser


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        config = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise UsageError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file {path}: invalid JSON at line {exc.lineno}") from None
    if not isinstance(config, dict):
        raise UsageError("config file must hold a JSON object")
    unknown = set(config) - _CONFIG_KEYS
    if unknown:
        raise UsageError(f"unknown config fields: {', '.join(sorted(unknown))}")
    return config


def _merged(args, config: dict, key: str, default=None):
    value = getattr(args, key, None)
    if value is not None:
        return value
    if key in config and config[key] is not None:
        return config[key]
    return default


def _parse_dims(text: str) -> list[tuple[int, int]]:
    dims = []
    for chunk in str(text).split(","):
        chunk = chunk.strip().lower()
        parts = chunk.split("x")
        if len(parts) != 2:
            raise UsageError(f"bad dims entry {chunk!r}; expected like 3x3")
        try:
            d_a, d_b = int(parts[0]), int(parts[1])
        except ValueError:
            raise UsageError(f"bad dims entry {chunk!r}; expected like 3x3") from None
        if d_a < 1 or d_b < 1:
            raise UsageError("dimensions must be positive")
        dims.append((d_a, d_b))
    if not dims:
        raise UsageError("empty dims list")
    return dims


class _Client:
    """Dispatches requests either to the in-process handlers or to a server."""

    def __init__(self, server: str | None):
        self.server = server.rstrip("/") if server else None

    def _post(self, path: str, payload: dict, model):
        import httpx

        response = httpx.post(f"{self.server}{path}", json=payload, timeout=None)
        if response.status_code >= 400:
            raise UsageError(f"server rejected request: {response.text}")
        return model.model_validate(response.json())

    def verify(self, req: VerifyRequest) -> VerifyResponse:
        if self.server:
            return self._post("/verify", req.model_dump(), VerifyResponse)
        return handlers.run_verify(req)

    def embed_check(self, req: EmbedCheckRequest) -> EmbedCheckResponse:
        if self.server:
            return self._post("/embed-check", req.model_dump(), EmbedCheckResponse)
        return handlers.run_embed_check(req)

    def certificate_check(self, req: CertificateCheckRequest) -> CertificateCheckResponse:
        if self.server:
            return self._post("/certificate-check", req.model_dump(),
                              CertificateCheckResponse)
        return handlers.run_certificate_check(req)

    def optimize(self, req: OptimizeRequest, checkpoint_dir) -> OptimizeResponse:
        if self.server:
            return self._post("/optimize", req.model_dump(), OptimizeResponse)
        return handlers.run_optimize(req, checkpoint_dir=checkpoint_dir)


def _print_header(response) -> None:
    print(f"matcorr {response.version}")
    print("conventions:")
    for line in response.conventions:
        print(f"  - {line}")


def _render_verify(response: VerifyResponse, fmt: str) -> None:
    if fmt == "json":
        print(response.model_dump_json(indent=2))
        return
    _print_header(response)
    scope = f"{response.target} [{response.backend}]"
    if response.window is not None:
        scope += f" window={response.window} envelope={response.envelope:.6g}"
    print(scope)
    for check in response.checks:
        mark = "ok" if check.passed else "FAIL"
        kind = "exact 0" if check.exact_zero else f"residual {check.residual:.6g}"
        print(f"  [{mark}] {check.name}: {kind}")
    for name, matrix in response.matrices.items():
        print(f"  {name} =")
        for sym_row, dec_row in zip(matrix.symbolic, matrix.decimal):
            decs = ", ".join(f"{re:+.6f}{im:+.6f}i" if im else f"{re:+.6f}"
                             for re, im in dec_row)
            print(f"    [{'  '.join(s.rjust(10) for s in sym_row)}]   ({decs})")
    print("PASS" if response.passed else "FAIL")


def _render_embed(response: EmbedCheckResponse, fmt: str) -> None:
    if fmt == "json":
        print(response.model_dump_json(indent=2))
        return
    print(f"matcorr {response.version}")
    print(f"embedding injectivity: length <= {response.length}, "
          f"|exponent| <= {response.exponent_bound}")
    print(f"  words checked: {response.words_checked}")
    print(f"  collisions:    {response.collisions}")
    heads = ", ".join(str(v) for v in response.power_lengths[:10])
    print(f"  (hgh)^n reduced lengths: {heads}, ... "
          f"(strictly increasing: {response.lengths_strictly_increasing})")
    print("PASS" if response.passed else "FAIL")


def _render_certificate(response: CertificateCheckResponse, fmt: str) -> None:
    if fmt == "json":
        print(response.model_dump_json(indent=2))
        return
    _print_header(response)
    print(f"certificate check against witness {response.witness} "
          f"({response.table_field} table)")
    if response.invariant_violations:
        print("  invariant violations:")
        for violation in response.invariant_violations:
            print(f"    - {violation}")
    else:
        print("  table invariants: all satisfied")
    for name, value in response.components.items():
        print(f"  residual {name}: {value:.6g}")
    suffix = " (exact zero)" if response.exact_zero else ""
    print(f"  total defect: {response.total_defect:.6g}{suffix}")


def _render_optimize(response: OptimizeResponse, fmt: str, out: str | None) -> None:
    if out:
        Path(out).write_text(response.csv)
        summary = Path(out).with_suffix(".summary.json")
        summary.write_text(response.model_dump_json(indent=2, exclude={"csv"}))
    if fmt == "json":
        print(response.model_dump_json(indent=2))
        return
    _print_header(response)
    print(f"defect sweep, witness {response.witness}, master seed {response.master_seed}")
    for report in response.reports:
        print(f"  d={report.dA}x{report.dB}: best defect {report.best_defect:.6g} "
              f"(restart {report.best_index} of {report.restarts}, "
              f"{report.wall_time_s:.1f}s)")
        if report.checkpoint:
            print(f"    checkpoint: {report.checkpoint}")
    if out:
        print(f"CSV written to {out}")
    else:
        print(response.csv, end="")


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config(args.config)
        command = args.command or config.get("command")
        if command is None:
            parser.print_usage(sys.stderr)
            return USAGE_ERROR
        fmt = _merged(args, config, "format", "text")
        server = _merged(args, config, "server")
        out = _merged(args, config, "out")
        client = _Client(server)
        if command == "verify":
            target = _merged(args, config, "target")
            if target is None:
                raise UsageError("verify needs a target "
                                 "(prop15, thm21, lemma32 or thm33)")
            req = VerifyRequest(target=target,
                                backend=_merged(args, config, "backend", "exact"),
                                window=_merged(args, config, "window", 8))
            response = client.verify(req)
            _render_verify(response, fmt)
            return OK if response.passed else VERIFY_FAILURE
        if command == "embed-check":
            length = _merged(args, config, "length")
            exponent = _merged(args, config, "exp")
            if length is None or exponent is None:
                raise UsageError("embed-check needs --length and --exp")
            if length < 1 or exponent < 1:
                raise UsageError("--length and --exp must be at least 1")
            req = EmbedCheckRequest(length=length, exponent_bound=exponent,
                                    cap=_merged(args, config, "cap", 2_000_000))
            try:
                response = client.embed_check(req)
            except handlers.ResourceFailure as exc:
                print(f"error: {exc}", file=sys.stderr)
                return VERIFY_FAILURE
            _render_embed(response, fmt)
            return OK if response.passed else VERIFY_FAILURE
        if command == "certificate-check":
            table_path = _merged(args, config, "table")
            witness = _merged(args, config, "witness")
            if table_path is None or witness is None:
                raise UsageError("certificate-check needs a table path and --witness")
            try:
                table = json.loads(Path(table_path).read_text())
            except FileNotFoundError:
                raise UsageError(f"table file not found: {table_path}") from None
            except json.JSONDecodeError as exc:
                raise UsageError(
                    f"{table_path}: invalid JSON at line {exc.lineno}, "
                    f"column {exc.colno}") from None
            try:
                response = client.certificate_check(
                    CertificateCheckRequest(witness=witness, table=table))
            except handlers.ServiceFailure as exc:
                raise UsageError(str(exc)) from None
            _render_certificate(response, fmt)
            return OK
        if command == "optimize":
            witness = _merged(args, config, "witness")
            dims_text = _merged(args, config, "dims")
            if witness is None or dims_text is None:
                raise UsageError("optimize needs --witness and --dims")
            req = OptimizeRequest(
                witness=witness, dims=_parse_dims(dims_text),
                restarts=_merged(args, config, "restarts", 50),
                seed=_merged(args, config, "seed", 42),
                max_iters=_merged(args, config, "max_iters"),
                include_warm=_merged(args, config, "include_warm", True))
            checkpoint_dir = Path(out).parent if out else None
            response = client.optimize(req, checkpoint_dir)
            _render_optimize(response, fmt, out)
            return OK
        raise UsageError(f"unknown command {command!r}")
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
