"""Command-line front end: ``bipdrg {spectrum,blueprint,verify}``.

Exit codes: 0 all checks pass, 1 a check failed, 2 bad usage or input,
3 a parameter outside the domain of the formulas.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .arrays import IntersectionArray
from .errors import (
    AuditFailure,
    BlueprintMismatch,
    BipDRGError,
    CaseParameterMismatch,
    DecompositionResidual,
    InadmissibleTheta,
    InvalidArray,
    LocalOrderingViolation,
    NotBipartite,
    NotDistanceRegular,
    OutOfRangeEta,
    ProjectorResidual,
)
from .graphs import (
    GraphInstance,
    build_doubled_odd,
    build_folded_cube,
    build_hypercube,
    read_edgelist,
    verify_drg,
)
from .modules import blueprint_endpoint0, blueprint_endpoint1, blueprint_endpoint2
from .oracle import (
    BLUEPRINT_RTOL,
    DEFAULT_SEED,
    blueprint_for,
    decompose,
    fmt_res,
    local_bounds_residual,
    multiplicity_audit,
    operator_set,
    u_eigenvector_checks,
    verify_blueprint,
)
from .poly import parse_frac
from .polyfams import verify_polynomial_identities, verify_sign_lemmas
from .spectra import spectrum, verify_spectral_lemmas

CONFIG_ENV = "BIPDRG_CONFIG"
EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_DOMAIN = 0, 1, 2, 3
SUITE = ("builtin:hypercube:4", "builtin:hypercube:5", "builtin:hypercube:6",
         "builtin:doubled_odd:3", "builtin:doubled_odd:4", "builtin:folded_cube:8")
BUILDERS = {"hypercube": build_hypercube, "doubled_odd": build_doubled_odd,
            "folded_cube": build_folded_cube}
MAX_WORKERS = 4


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    graph: Optional[str] = None
    array: Optional[str] = None
    vertex: str = "0"
    tol: float = BLUEPRINT_RTOL
    seed: int = DEFAULT_SEED
    format: str = "table"

    def __post_init__(self):
        if not self.tol > 0:
            raise UsageError("--tol must be positive")


def load_graph(spec: str) -> GraphInstance:
    kind, _, rest = spec.partition(":")
    if kind == "builtin":
        name, _, param = rest.partition(":")
        if name not in BUILDERS:
            raise UsageError(f"unknown builtin graph {name!r}; choose from {sorted(BUILDERS)}")
        try:
            value = int(param)
        except ValueError:
            raise UsageError(f"builtin:{name} needs an integer parameter") from None
        return BUILDERS[name](value)
    if kind == "edgelist":
        if not Path(rest).is_file():
            raise UsageError(f"edge list {rest!r} not found")
        return read_edgelist(rest)
    raise UsageError(f"graph spec must look like builtin:NAME:N or edgelist:PATH, got {spec!r}")


def load_array(path: str) -> IntersectionArray:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from None
    return IntersectionArray.from_json(obj)


def resolve_array(cfg: RunConfig) -> IntersectionArray:
    if cfg.array:
        return load_array(cfg.array).require_valid()
    if cfg.graph and cfg.graph.startswith("array:"):
        return load_array(cfg.graph[len("array:"):]).require_valid()
    if cfg.graph and cfg.graph != "all":
        return verify_drg(load_graph(cfg.graph)).require_valid()
    raise UsageError("give --graph or --array")


def _plain_array(arr: IntersectionArray) -> dict:
    return {"D": arr.D, "b": list(arr.b), "c": list(arr.c)}


# ---------------------------------------------------------------------------
# commands


def cmd_spectrum(cfg: RunConfig) -> Tuple[int, dict]:
    arr = resolve_array(cfg)
    spec = spectrum(arr)
    lemmas = verify_spectral_lemmas(arr, spec)
    report = {
        "array": _plain_array(arr),
        "spectrum": spec.to_json(),
        "checks": {name: {"ok": ok, "residual": fmt_res(res)} for name, ok, res in lemmas.checks},
        "ok": lemmas.ok,
    }
    return (EXIT_OK if lemmas.ok else EXIT_FAIL), report


def cmd_blueprint(cfg: RunConfig, endpoint: int, eta: Optional[str]) -> Tuple[int, dict]:
    if endpoint not in (0, 1, 2):
        raise UsageError("--endpoint must be 0, 1 or 2")
    if (endpoint == 2) != (eta is not None):
        raise UsageError("--eta is required with --endpoint 2 and only then")
    arr = resolve_array(cfg)
    spec = spectrum(arr)
    if endpoint == 0:
        bp = blueprint_endpoint0(arr, spec)
    elif endpoint == 1:
        bp = blueprint_endpoint1(arr, spec)
    else:
        try:
            value = parse_frac(eta)
        except (ValueError, ZeroDivisionError):
            raise UsageError(f"cannot parse --eta {eta!r}") from None
        bp = blueprint_endpoint2(arr, spec, value)
    return EXIT_OK, {"array": _plain_array(arr), "blueprint": bp.to_json()}


def _family(ok: bool, residual: float, detail: str = "") -> dict:
    out = {"ok": bool(ok), "max_residual": fmt_res(residual)}
    if detail:
        out["detail"] = detail
    return out


def verify_job(graph_spec: str, x: int, tol: float, seed: int) -> dict:
    """Every check for one (graph, base vertex); failures are reported, not raised."""
    families: Dict[str, dict] = {}
    out = {"graph": graph_spec, "vertex": x, "families": families}
    try:
        g = load_graph(graph_spec)
        arr = verify_drg(g).require_valid()
    except (NotBipartite, NotDistanceRegular, InvalidArray) as exc:
        families["graph is a bipartite distance-regular graph"] = _family(False, 0.0, str(exc))
        out["ok"] = False
        return out
    if not 0 <= x < g.n:
        raise UsageError(f"--vertex {x} out of range 0..{g.n - 1}")
    families["graph is a bipartite distance-regular graph"] = _family(True, 0.0)
    out["array"] = _plain_array(arr)
    spec = spectrum(arr)

    lem = verify_spectral_lemmas(arr, spec)
    families["eigenvalues and multiplicities"] = _family(
        lem.ok, max(r for _, _, r in lem.checks), ", ".join(lem.failures()))
    ids = verify_polynomial_identities(arr, spec)
    families["polynomial identities"] = _family(
        ids.ok, max(r for _, r in ids.results.values()), ", ".join(ids.failures()))
    signs = verify_sign_lemmas(arr, spec)
    families["sign patterns"] = _family(signs.ok, 0.0, ", ".join(signs.failures()))

    try:
        ops = operator_set(g, x, arr, spec)
        families["operator algebra"] = _family(True, max(ops.residuals.values()))
        dec = decompose(g, x, seed, ops)
    except (ProjectorResidual, LocalOrderingViolation, DecompositionResidual) as exc:
        families["operator algebra"] = _family(False, 0.0, f"{type(exc).__name__}: {exc}")
        out["ok"] = False
        return out

    ul = u_eigenvector_checks(ops, dec)
    stray = local_bounds_residual(ops, dec.local)
    bad_rows = [f"eta={r['eta']} dim Mv={r['dim_Mv']}" for r in ul.rows if not r["ok"]]
    if stray > 1e-9:
        bad_rows.insert(0, "local eigenvalue outside its bounds")
    families["local eigenvalues and U"] = _family(ul.ok and stray <= 1e-9, max(stray, 0.0),
                                                  "; ".join(bad_rows))

    per_endpoint: Dict[str, List[float]] = {"endpoint 0 and 1 modules": [], "endpoint 2 modules": []}
    failures: Dict[str, List[str]] = {k: [] for k in per_endpoint}
    for m in dec.modules:
        bp = blueprint_for(m, arr, spec)
        if bp is None:
            continue
        key = "endpoint 2 modules" if m.endpoint == 2 else "endpoint 0 and 1 modules"
        rep = verify_blueprint(ops, m, bp, tol=tol, raise_on_failure=False)
        per_endpoint[key].append(max(rep.residuals.values()))
        failures[key] += [f"{m.label}: {c}" for c in rep.failures()]
    for key, vals in per_endpoint.items():
        families[key] = _family(not failures[key], max(vals, default=0.0), "; ".join(failures[key]))

    audit = multiplicity_audit(dec, ops, tol=tol, raise_on_failure=False)
    families["multiplicities"] = _family(
        audit.ok, audit.same_eta_residual,
        ", ".join(k for k, ok in sorted(audit.checks.items()) if not ok))
    out["decomposition"] = {
        "counts": dec.counts(),
        "mult": dec.to_json()["mult"],
        "mu": dec.to_json()["mu"],
        "dimension_total": sum(m.dimension for m in dec.modules),
    }
    out["ok"] = all(f["ok"] for f in families.values())
    return out


def cmd_verify(cfg: RunConfig) -> Tuple[int, dict]:
    if not cfg.graph:
        raise UsageError("verify needs --graph")
    graphs = SUITE if cfg.graph == "all" else (cfg.graph,)
    jobs: List[Tuple[str, int]] = []
    for spec_ in graphs:
        if cfg.vertex == "all":
            jobs += [(spec_, x) for x in range(load_graph(spec_).n)]
        else:
            try:
                jobs.append((spec_, int(cfg.vertex)))
            except ValueError:
                raise UsageError("--vertex must be an integer or 'all'") from None
    if len(jobs) == 1:
        results = {jobs[0]: verify_job(*jobs[0], cfg.tol, cfg.seed)}
    else:
        with ThreadPoolExecutor(max_workers=min(MAX_WORKERS, len(jobs))) as pool:
            futures = {job: pool.submit(verify_job, *job, cfg.tol, cfg.seed) for job in jobs}
            results = {job: fut.result() for job, fut in futures.items()}
    ordered = [results[job] for job in sorted(results)]
    ok = all(r["ok"] for r in ordered)
    return (EXIT_OK if ok else EXIT_FAIL), {"ok": ok, "seed": cfg.seed, "jobs": ordered}


# ---------------------------------------------------------------------------
# output


def dump_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def render_table(command: str, report: dict) -> str:
    lines: List[str] = []
    if command == "spectrum":
        sp = report["spectrum"]
        lines.append(f"{'i':>3}  {'theta_i':>22}  {'m_i':>22}")
        for i, (t, m) in enumerate(zip(sp["theta"], sp["m"])):
            lines.append(f"{i:>3}  {_short(t):>22}  {_short(m):>22}")
        lines.append("")
        for name, chk in report["checks"].items():
            lines.append(f"{'pass' if chk['ok'] else 'FAIL'}  {name}")
    elif command == "blueprint":
        bp = report["blueprint"]
        case = bp["case"]
        head = f"endpoint {bp['endpoint']}, dimension {bp['dimension']}"
        if case:
            head += f", case {case['case']} (eta = {_short(case['eta'])})"
        lines.append(head)
        lines.append(f"E-basis indices:   {bp['E_indices']}")
        lines.append(f"E*A-basis indices: {bp['EA_indices']}")
        lines.append("E norms:   " + "  ".join(_short(x) for x in bp["E_norms"]))
        lines.append("E*A norms: " + "  ".join(_short(x) for x in bp["EA_norms"]))
        lines.append("matrix of A:")
        lines += ["  " + "  ".join(f"{_short(x):>8}" for x in row) for row in bp["tridiag"]]
        lines.append("transition:")
        lines += ["  " + "  ".join(f"{_short(x):>8}" for x in row) for row in bp["transition"]]
    else:
        for job in report["jobs"]:
            lines.append(f"{job['graph']} @ vertex {job['vertex']}")
            for name, fam in job["families"].items():
                mark = "pass" if fam["ok"] else "FAIL"
                extra = f"  [{fam['detail']}]" if fam.get("detail") else ""
                lines.append(f"  {mark}  {name:<46} max residual {fam['max_residual']}{extra}")
        lines.append("all checks pass" if report["ok"] else "some checks FAILED")
    return "\n".join(lines) + "\n"


def _short(text: str) -> str:
    return text[:-2] if text.endswith("/1") else text


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--graph", help="builtin:NAME:N, edgelist:PATH, array:PATH or 'all'")
    common.add_argument("--array", help="JSON file with keys D, b, c")
    common.add_argument("--vertex", help="base vertex index or 'all' (default 0)")
    common.add_argument("--tol", type=float, help="relative tolerance for oracle comparisons")
    common.add_argument("--seed", type=int, help="seed for the decomposition (default 42)")
    common.add_argument("--format", choices=("table", "json"), help="output format")

    parser = argparse.ArgumentParser(prog="bipdrg", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("spectrum", parents=[common], help="eigenvalues, multiplicities and checks")
    bp = sub.add_parser("blueprint", parents=[common], help="closed-form module description")
    bp.add_argument("--endpoint", type=int, required=True)
    bp.add_argument("--eta", help="local eigenvalue (required for endpoint 2), e.g. -2 or 1/3")
    sub.add_parser("verify", parents=[common], help="compare formulas with the graph oracle")
    return parser


def _config_defaults() -> dict:
    path = os.environ.get(CONFIG_ENV)
    if not path:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"{CONFIG_ENV}={path}: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError(f"{CONFIG_ENV}={path}: expected a JSON object")
    unknown = set(data) - set(RunConfig.__dataclass_fields__)
    if unknown:
        raise UsageError(f"{CONFIG_ENV}={path}: unknown keys {sorted(unknown)}")
    return data


def make_config(args: argparse.Namespace) -> RunConfig:
    values = _config_defaults()
    for key in RunConfig.__dataclass_fields__:
        given = getattr(args, key, None)
        if given is not None:
            values[key] = given
    if "vertex" in values:
        values["vertex"] = str(values["vertex"])
    return RunConfig(**values)


def _glue_eta(argv: List[str]) -> List[str]:
    # argparse takes "-1/2" for a flag; negative etas are the common case
    out: List[str] = []
    it = iter(argv)
    for tok in it:
        if tok == "--eta":
            nxt = next(it, None)
            out.append(tok if nxt is None else f"--eta={nxt}")
        else:
            out.append(tok)
    return out


def run(argv: Optional[List[str]] = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    argv = _glue_eta(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = make_config(args)
        if args.command == "spectrum":
            code, report = cmd_spectrum(cfg)
        elif args.command == "blueprint":
            code, report = cmd_blueprint(cfg, args.endpoint, args.eta)
        else:
            code, report = cmd_verify(cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=err)
        return EXIT_USAGE
    except InvalidArray as exc:
        print(f"invalid input: {exc}", file=err)
        return EXIT_USAGE
    except (OutOfRangeEta, InadmissibleTheta, CaseParameterMismatch) as exc:
        print(f"domain error: {exc}", file=err)
        return EXIT_DOMAIN
    except (NotBipartite, NotDistanceRegular) as exc:
        print(f"check failed: {type(exc).__name__}: {exc}", file=err)
        return EXIT_FAIL
    except (BlueprintMismatch, AuditFailure) as exc:
        print(f"check failed: {exc}", file=err)
        return EXIT_FAIL
    except BipDRGError as exc:
        print(f"check failed: {type(exc).__name__}: {exc}", file=err)
        return EXIT_FAIL
    if cfg.format == "json":
        out.write(dump_json(report))
    else:
        out.write(render_table(args.command, report))
    return code


def main() -> None:
    sys.exit(run())
