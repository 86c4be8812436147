"""Command-line front end.

Exit status: 0 on success, 1 when a run produces a verified counterexample
or a failed check, 2 on configuration or capacity errors (nothing written).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path


from . import SCHEMA_VERSION
from .errors import LabError
from .gf2_designs import (CharacterFamily, FieldSpec, bch_family, independent_family,
                          rademacher_family, random_family, verify_independence)
from .hypercube import HypercubeFunction, character
from .lambda_analysis import EXACT_THRESHOLD, LambdaReport, lambda_constant, max_sign_norm
from .lemma_lab import LemmaCertificate, OptimalityReport, optimality_instance, verify_lemma
from .operators_l1 import L1Operator
from .separation_lab import SeparationReport, coverage_experiment

SEED_ENV = "LAMBDALAB_SEED"


class ConfigError(Exception):
    pass


def _key_values(tokens: list[str]) -> dict[str, int]:
    out = {}
    for tok in tokens:
        key, sep, value = tok.partition("=")
        if not sep:
            raise ConfigError(f"expected key=value, got {tok!r}")
        try:
            out[key.strip()] = int(value)
        except ValueError:
            raise ConfigError(f"{key.strip()} must be an integer, got {value!r}") from None
    return out


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 1 << 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return value


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return _seed(raw)
    except (ValueError, argparse.ArgumentTypeError):
        raise ConfigError(f"{SEED_ENV}={raw!r} is not a valid seed") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=None)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", default=None, help="report path (stdout when omitted)")
    common.add_argument("--exact-threshold", type=_positive, default=EXACT_THRESHOLD)
    common.add_argument("--max-bits", type=_positive, default=24)
    common.add_argument("--workers", type=_positive, default=os.cpu_count() or 1)
    common.add_argument("--config", default=None, help="key = value file; flags take precedence")

    parser = argparse.ArgumentParser(prog="lambdalab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", parents=[common], help="build a character family")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--bch", nargs="+", metavar="KEY=VALUE", help="m=<degree> k=<half order>")
    src.add_argument("--rademacher", type=_positive, metavar="N")
    src.add_argument("--random", nargs="+", metavar="KEY=VALUE", help="n=<bits> size=<count>")
    src.add_argument("--independent", nargs="+", metavar="KEY=VALUE", help="n= size= t=")
    p.add_argument("--verify", type=int, default=None, metavar="T",
                   help="certify independence at order T (status 1 on a witness)")

    p = sub.add_parser("lambda", parents=[common], help="Lambda(q) and sign-extremal norms")
    p.add_argument("--family", required=True)
    p.add_argument("--q", type=float, default=4.0)
    p.add_argument("--samples", type=_positive, default=256)
    p.add_argument("--sign-mode", choices=("exact", "heuristic", "auto"), default="auto")

    p = sub.add_parser("lemma", parents=[common], help="lemma certificates")
    lsub = p.add_subparsers(dest="action", required=True)
    v = lsub.add_parser("verify", parents=[common])
    v.add_argument("--input", nargs="+", required=True, help="operator and family/function files")
    v.add_argument("--q", type=float, default=4.0)
    v.add_argument("--sign-mode", choices=("exact", "heuristic", "auto"), default="exact")
    o = lsub.add_parser("optimality", parents=[common])
    for parser_ in (o, sub.add_parser("optimality", parents=[common], help="optimality construction")):
        parser_.add_argument("--q", type=int, default=4)
        parser_.add_argument("--N", type=_positive, required=True)
        parser_.add_argument("--p", type=float, default=2.0)

    p = sub.add_parser("separate", parents=[common], help="coverage sweep")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--n", type=_int_list, required=True)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--strategy", default="orthogonal_map")
    return parser


def _read_config(path: str) -> list[str]:
    """Flag tokens from a ``key = value`` file, with file:line diagnostics."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from None
    tokens: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("_", "-")
        if not sep or not key or not key.replace("-", "").isalnum():
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        if key in ("config", "command"):
            raise ConfigError(f"{path}:{lineno}: '{key}' cannot be set from a config file")
        values = value.split()
        if not values:
            raise ConfigError(f"{path}:{lineno}: missing value for {key!r}")
        tokens.append(f"--{key}")
        tokens.extend(values)
    return tokens


def _expand_config(argv: list[str]) -> list[str]:
    """Insert config tokens right after the subcommand path so explicit flags win."""
    if "--config" not in argv and not any(a.startswith("--config=") for a in argv):
        return argv
    out, path, i = [], None, 0
    while i < len(argv):
        a = argv[i]
        if a == "--config":
            if i + 1 >= len(argv):
                raise ConfigError("--config needs a path")
            path, i = argv[i + 1], i + 2
            continue
        if a.startswith("--config="):
            path = a.split("=", 1)[1]
        else:
            out.append(a)
        i += 1
    head = 1 if out and out[0] != "lemma" else 2
    return out[:head] + _read_config(path) + out[head:]


def _load_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read ({exc.strerror})") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") from None


def _unwrap(data):
    if isinstance(data, dict) and "schema" in data and "result" in data:
        return data["result"]
    return data


def _family_from_args(args) -> CharacterFamily:
    if args.bch:
        kv = _key_values(args.bch)
        if set(kv) != {"m", "k"}:
            raise ConfigError("--bch needs exactly m=<degree> k=<half order>")
        return bch_family(FieldSpec.default(kv["m"]), kv["k"])
    if args.rademacher:
        return rademacher_family(args.rademacher)
    if args.random:
        kv = _key_values(args.random)
        if set(kv) != {"n", "size"}:
            raise ConfigError("--random needs n=<bits> size=<count>")
        return random_family(kv["n"], kv["size"], args.seed)
    kv = _key_values(args.independent)
    if set(kv) != {"n", "size", "t"}:
        raise ConfigError("--independent needs n=<bits> size=<count> t=<order>")
    return independent_family(kv["n"], kv["size"], kv["t"], args.seed)


def _run_construct(args):
    fam = _family_from_args(args)
    result = {"family": fam.to_dict()}
    status = 0
    if args.verify is not None:
        check = verify_independence(fam, args.verify)
        result["verification"] = {"t": check.t, "passed": check.passed,
                                  "witness": list(check.witness) if check.witness else None}
        status = 0 if check.passed else 1
    rows = [{"index": i, "mask": m} for i, m in enumerate(fam.masks)]
    return "construct", result, status, rows


def _run_lambda(args):
    data = _unwrap(_load_json(args.family))
    fam = CharacterFamily.from_dict(data.get("family", data))
    report = lambda_constant(fam, args.q, samples=args.samples, seed=args.seed)
    vectors = [character(fam.n, m) for m in fam.masks]
    search = max_sign_norm(vectors, args.q, mode=args.sign_mode, seed=args.seed,
                           exact_threshold=args.exact_threshold)
    result = {"lambda": report.to_dict(), "sign_search": search.to_dict()}
    return "lambda", result, 0, _flat_rows(result)


def _vectors_from(data, n: int) -> list[HypercubeFunction]:
    if isinstance(data, list):
        return [HypercubeFunction.from_dict(d) for d in data]
    if "family" in data:
        data = data["family"]
    if "masks" in data:
        fam = CharacterFamily.from_dict(data)
        if fam.n != n:
            raise ConfigError(f"family lives on {fam.n} bits but the operator source has {n}")
        return [character(n, m) for m in fam.masks]
    if "values" in data:
        return [HypercubeFunction.from_dict(data)]
    raise ConfigError("input is neither a family nor functions")


def _run_lemma_verify(args):
    operator, others = None, []
    for path in args.input:
        data = _unwrap(_load_json(path))
        if isinstance(data, dict) and "matrix" in data:
            if operator is not None:
                raise ConfigError(f"{path}: more than one operator given")
            operator = L1Operator.from_dict(data)
        else:
            others.append(data)
    if operator is None or not others:
        raise ConfigError("lemma verify needs one operator file and at least one vector file")
    bits = operator.source.cube_bits
    if bits is None:
        raise ConfigError("operator source must be a uniform hypercube space")
    vectors = [v for data in others for v in _vectors_from(data, bits)]
    cert = verify_lemma(operator, vectors, args.q, sign_mode=args.sign_mode, seed=args.seed,
                        exact_threshold=args.exact_threshold)
    result = cert.to_dict()
    return "lemma", result, 1 if cert.verdict == "violated" else 0, _flat_rows(result)


def _run_optimality(args):
    report = optimality_instance(args.q, args.N, args.p, seed=args.seed, max_bits=args.max_bits)
    result = report.to_dict()
    return "optimality", result, 0 if report.holds else 1, _flat_rows(result)


def _run_separate(args):
    report = coverage_experiment(args.p, args.q, args.n, args.epsilon, args.strategy,
                                 seed=args.seed, workers=args.workers,
                                 exact_threshold=args.exact_threshold, max_bits=args.max_bits)
    ok = all(i.survivors.markov_ok and i.survivors.reuse_ok and i.lemma_ok
             and i.survivor_bound_ok is not False for i in report.instances)
    return "separate", report.to_dict(), 0 if ok else 1, report.csv_rows()


def _flat_rows(result: dict, prefix: str = "") -> list[dict]:
    rows = []
    for key in sorted(result):
        value = result[key]
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            rows.extend(_flat_rows(value, name + "."))
        else:
            rows.append({"field": name, "value": json.dumps(value, sort_keys=True)})
    return rows


def _config_echo(args) -> dict:
    skip = {"out", "workers", "config", "format"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _render(kind: str, args, result: dict, rows: list[dict]) -> str:
    if args.format == "json":
        doc = {"schema": SCHEMA_VERSION, "kind": kind, "config": _config_echo(args),
               "result": result}
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"
    buf = io.StringIO()
    buf.write(f"# schema: {SCHEMA_VERSION} kind: {kind}\n")
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return buf.getvalue()


_RUNNERS = {"construct": _run_construct, "lambda": _run_lambda, "optimality": _run_optimality,
            "separate": _run_separate}


def load_report(path: str):
    """Parse an emitted JSON report back into its originating type."""
    doc = json.loads(Path(path).read_text())
    kind, result = doc["kind"], doc["result"]
    if kind == "construct":
        return CharacterFamily.from_dict(result["family"])
    if kind == "lambda":
        return LambdaReport.from_dict(result["lambda"])
    if kind == "lemma":
        return LemmaCertificate.from_dict(result)
    if kind == "optimality":
        return OptimalityReport.from_dict(result)
    if kind == "separate":
        return SeparationReport.from_dict(result)
    raise ValueError(f"unknown report kind {kind!r}")


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _expand_config(argv)
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            return int(exc.code or 0)
        if args.seed is None:
            args.seed = _default_seed()
        if args.command == "lemma":
            runner = _run_lemma_verify if args.action == "verify" else _run_optimality
        else:
            runner = _RUNNERS[args.command]
        kind, result, status, rows = runner(args)
        text = _render(kind, args, result, rows)
    except (ConfigError, LabError) as exc:
        print(f"lambdalab: error: {exc}", file=sys.stderr)
        return 2
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
