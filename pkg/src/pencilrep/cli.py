"""Command-line entry point: ``analyze``, ``decompose``, ``simulate`` and ``corpus``.

Reports are JSON (plus a CSV trajectory for ``simulate``) written to
``--out`` or, by default, to ``$PENCILREP_OUTPUT_DIR`` or the working
directory. Exit codes: 0 success, 2 assumption or classification failure,
3 numerical-consistency failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import corpus
from .errors import ConditionDisagreement, InconsistencyError, PencilError
from .linalg import SubspaceBasis, opnorm
from .pencil import from_ar
from .poles import (
    EXCEEDS_CAP,
    classify_pole,
    classify_second_order,
    classify_simple_pole,
    laurent_oracle,
    laurent_principal_second,
    residue_simple,
)
from .representation import cointegration_spaces, decompose
from .simulation import (
    initial_from_representation,
    probe_directions,
    sample_innovations,
    sample_initial_conditions,
    simulate_ar,
    write_trajectory_csv,
)

OUTPUT_ENV = "PENCILREP_OUTPUT_DIR"
EXIT_OK, EXIT_ASSUMPTION, EXIT_CONSISTENCY = 0, 2, 3
COMMANDS = ("analyze", "decompose", "simulate", "corpus")
MAX_SPACE_DIRECTIONS = 8


@dataclass
class RunConfig:
    command: str
    source: str | None = None
    z0: complex = 1.0
    tol: float | None = None
    N: int = corpus.DEFAULT_N
    kind: str = "auto"
    T: int = 2000
    reps: int = 200
    seed: int = 0
    direction: str = "space:coint"
    real: bool = False
    out: Path | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.command in ("analyze", "decompose", "simulate") and not self.source:
            raise ValueError(f"{self.command} needs a pencil or model source")

    def output_dir(self) -> Path:
        d = self.out or Path(os.environ.get(OUTPUT_ENV, "."))
        d = Path(d)
        d.mkdir(parents=True, exist_ok=True)
        return d


def _complex(text: str) -> complex:
    parts = text.split(",")
    if len(parts) == 2:
        return complex(float(parts[0]), float(parts[1]))
    return complex(text.replace(" ", ""))


def _num(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def _space_json(V: SubspaceBasis) -> dict:
    return {"dim": V.dim, "basis": corpus.matrix_to_json(V.basis)}


def _json_safe(obj):
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return _num(obj)
    if isinstance(obj, np.ndarray):
        return corpus.matrix_to_json(obj) if obj.ndim == 2 else corpus.vector_to_json(obj.ravel())
    return obj


def _write(path: Path, doc: dict) -> Path:
    path.write_text(corpus.dumps(_json_safe(doc)))
    return path


def _verdict_doc(v) -> dict:
    return {"pole_type": v.pole_type, "holds": v.holds, "order": v.order,
            "condition_flags": v.condition_flags, "diagnostics": v.diagnostics,
            "oracle_norms": {str(k): n for k, n in sorted(v.oracle_norms.items())}}


def analyze(cfg: RunConfig) -> dict:
    P, origin = corpus.load_pencil(cfg.source, cfg.N)
    z0 = cfg.z0
    order = classify_pole(P, z0, cfg.tol)
    doc = {"command": "analyze", "source": origin, "z0": z0, "order": order}
    if order == 1:
        doc["verdict"] = _verdict_doc(classify_simple_pole(P, z0, cfg.tol))
        doc["laurent"] = {"-1": residue_simple(P, z0, cfg.tol)}
    elif order == 2:
        doc["verdict"] = _verdict_doc(classify_second_order(P, z0, cfg.tol))
        N2, N1 = laurent_principal_second(P, z0, cfg.tol)
        doc["laurent"] = {"-2": N2, "-1": N1}
    oracle = laurent_oracle(P, z0, k_min=-4, k_max=0)
    doc["oracle"] = {"norms": {str(k): n for k, n in sorted(oracle.norms().items())},
                     "doubling_change": oracle.doubling_change, "nodes": oracle.nodes_used,
                     "radius": oracle.radius_used}
    return doc


def _decomposition_doc(model, d) -> dict:
    doc = {"kind": d.kind, "truncation_K": d.truncation_K, "tail_norm": d.tail_norm,
           "taylor_radius": d.taylor_radius, "psitilde": [C for C in d.psitilde]}
    if d.kind == "I1":
        doc["psi1"] = d.psi1
    else:
        doc["upsilon2"] = d.upsilon2
        doc["upsilon1"] = d.upsilon1
    rep = cointegration_spaces(model, d)
    doc["spaces"] = {k: _space_json(V) for k, V in rep.spaces.items()}
    return doc


def decompose_cmd(cfg: RunConfig) -> dict:
    model, origin = corpus.load_model(cfg.source, cfg.N)
    d = decompose(model, cfg.kind, cfg.tol)
    return {"command": "decompose", "source": origin, **_decomposition_doc(model, d)}


_SPACE_ALIASES = {
    "I1": {"coint": "cointegrating", "attractor": "attractor"},
    "I2": {"coint": "tier2_coker_U2_cap_coker_U1", "tier1": "tier1_coker_U2",
           "tier2": "tier2_coker_U2_cap_coker_U1", "attractor": "trend2_ran_U2"},
}


def _directions(text: str, model, d) -> list[np.ndarray]:
    if text.startswith("space:"):
        name = text.split(":", 1)[1]
        rep = cointegration_spaces(model, d)
        key = _SPACE_ALIASES[d.kind].get(name, name)
        if key not in rep.spaces:
            raise ValueError(f"unknown space {name!r} for an {d.kind} model")
        V = rep[key]
        if V.dim == 0:
            raise ValueError(f"space {key} is zero-dimensional")
        return [V.basis[:, i] for i in range(min(V.dim, MAX_SPACE_DIRECTIONS))]
    x = np.array([complex(t.strip()) for t in text.split(",")])
    if x.shape != (model.dim,):
        raise ValueError(f"direction needs {model.dim} entries")
    return [x]


def simulate_cmd(cfg: RunConfig) -> dict:
    model, origin = corpus.load_model(cfg.source, cfg.N)
    d = decompose(model, cfg.kind, cfg.tol)
    dirs = _directions(cfg.direction, model, d)
    verdicts = probe_directions(model, d, dirs, T=cfg.T, replications=cfg.reps, seed=cfg.seed,
                                real=cfg.real)
    # the displayed path uses its own streams, apart from the probe ensemble
    eps_seq, init_seq = np.random.SeedSequence([cfg.seed, 1]).spawn(2)
    Z0, Z1 = sample_initial_conditions(model, d, np.random.default_rng(init_seq), cfg.real)
    eps = sample_innovations(model, cfg.T, eps_seq, cfg.real)
    traj = simulate_ar(model, cfg.T, seed=cfg.seed, initial=initial_from_representation(model, Z0, Z1),
                       innovations=eps)
    csv_path = write_trajectory_csv(traj, cfg.output_dir() / "trajectory.csv")
    return {"command": "simulate", "source": origin, "kind": d.kind, "T": cfg.T,
            "replications": cfg.reps, "seed": cfg.seed, "real": cfg.real,
            "trajectory_csv": str(csv_path),
            "verdicts": [{"direction": v.direction, "growth_slope": v.growth_slope,
                          "verdict": v.verdict, "times": list(v.times),
                          "variances": list(v.variances)} for v in verdicts]}


def _corpus_case(example_id: int, N: int) -> dict:
    spec = corpus.ExampleSpec(example_id, N)
    expected = corpus.EXPECTED_ORDERS[example_id]
    try:
        order = classify_pole(corpus.example_pencil(spec), 1.0)
        error = None
    except PencilError as exc:
        order, error = None, f"{type(exc).__name__}: {exc}"
    return {"example": spec.describe(), "order": order, "expected": expected,
            "pass": order == expected, "error": error}


def _jordan_case() -> dict:
    P = from_ar([corpus.JORDAN])
    N2, N1 = laurent_principal_second(P, 1.0)
    err = max(opnorm(N2 - np.array([[0, 1], [0, 0]])), opnorm(N1 - np.array([[-1, 1], [0, -1]])))
    return {"example": "jordan", "order": classify_pole(P, 1.0), "expected": 2,
            "closed_form_error": err, "pass": err <= 1e-10}


def corpus_cmd(cfg: RunConfig) -> dict:
    with ThreadPoolExecutor() as pool:
        futures = [pool.submit(_corpus_case, i, cfg.N) for i in corpus.EXAMPLE_IDS]
        jordan = pool.submit(_jordan_case)
        cases = [f.result() for f in futures] + [jordan.result()]
    return {"command": "corpus", "N": cfg.N, "cap": 2, "exceeds_cap_label": EXCEEDS_CAP,
            "cases": cases, "all_pass": all(c["pass"] for c in cases)}


_HANDLERS = {"analyze": analyze, "decompose": decompose_cmd, "simulate": simulate_cmd,
             "corpus": corpus_cmd}


@dataclass
class RunResult:
    report: Path
    doc: dict
    trajectory: Path | None = None


def run(cfg: RunConfig) -> RunResult:
    """Execute ``cfg`` and write its report."""
    doc = _HANDLERS[cfg.command](cfg)
    report = _write(cfg.output_dir() / f"{cfg.command}.json", doc)
    traj = Path(doc["trajectory_csv"]) if "trajectory_csv" in doc else None
    return RunResult(report=report, doc=doc, trajectory=traj)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pencilrep", description=__doc__.splitlines()[0])
    parser.add_argument("--out", type=Path, help=f"output directory (default ${OUTPUT_ENV} or .)")
    sub = parser.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="classify the pole of A(z)^-1 at z0")
    a.add_argument("--pencil", required=True, help="JSON file or example:<id>[:<N>] / example:jordan")
    a.add_argument("--z0", type=_complex, default=1.0, help="re,im (default 1,0)")
    a.add_argument("--tol", type=float)
    a.add_argument("--N", type=int, default=corpus.DEFAULT_N)

    d = sub.add_parser("decompose", help="I(1)/I(2) representation of an AR model")
    d.add_argument("--model", required=True)
    d.add_argument("--kind", choices=("auto", "i1", "i2"), default="auto")
    d.add_argument("--tol", type=float)
    d.add_argument("--N", type=int, default=corpus.DEFAULT_N)

    s = sub.add_parser("simulate", help="simulate a trajectory and probe stationarity")
    s.add_argument("--model", required=True)
    s.add_argument("--T", type=int, default=2000)
    s.add_argument("--reps", type=int, default=200)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--direction", default="space:coint",
                   help="comma-separated complex entries, or space:<coint|attractor|tier1|tier2|name>")
    s.add_argument("--kind", choices=("auto", "i1", "i2"), default="auto")
    s.add_argument("--real", action="store_true", help="real Gaussian innovations")
    s.add_argument("--N", type=int, default=corpus.DEFAULT_N)

    c = sub.add_parser("corpus", help="run the example fixtures")
    c.add_argument("--N", type=int, default=corpus.DEFAULT_N)
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    kw = {k: v for k, v in vars(ns).items() if k in RunConfig.__dataclass_fields__ and v is not None}
    kw["source"] = getattr(ns, "pencil", None) or getattr(ns, "model", None)
    return RunConfig(**kw)


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(ns)
        result = run(cfg)
    except (ConditionDisagreement, InconsistencyError) as exc:
        print(f"consistency failure: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY
    except (PencilError, ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ASSUMPTION
    doc = result.doc
    print(f"wrote {result.report}")
    if cfg.command == "corpus":
        for c in doc["cases"]:
            ex = c["example"]
            name = ex if isinstance(ex, str) else f"example {ex['id']}"
            print(f"{name}: order {c['order']} (expected {c['expected']}) {'PASS' if c['pass'] else 'FAIL'}")
        return EXIT_OK if doc["all_pass"] else EXIT_ASSUMPTION
    if cfg.command == "analyze":
        print(f"order at z0={cfg.z0}: {doc['order']}")
    if cfg.command == "simulate":
        for v in doc["verdicts"]:
            print(f"slope {v['growth_slope']:.3f}: {v['verdict']}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
