"""Command-line scenarios with machine-readable verification reports.

Each scenario runs library operations on its inputs and emits a JSON report
``{"scenario", "status", "checks": [...], "data": {...}}`` on stdout plus a
short human summary on stderr.  Exit codes: 0 all checks pass, 1 some check
failed, 2 unknown scenario or bad arguments, 3 unreadable or invalid input.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import channels, cv, linalg, matrixio, measurements, rand, states
from .config import tolerances
from .errors import QMError

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_INPUT = 0, 1, 2, 3


class InputError(Exception):
    pass


@dataclass
class Check:
    name: str
    expected: float
    actual: float
    tolerance: float
    relation: str = "=="

    @property
    def passed(self) -> bool:
        a, e, t = self.actual, self.expected, self.tolerance
        if not math.isfinite(a):
            return False
        if self.relation == "==":
            return abs(a - e) <= t
        if self.relation == "<=":
            return a <= e + t
        if self.relation == ">=":
            return a >= e - t
        if self.relation == ">":
            return a > e + t
        raise ValueError(self.relation)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "expected": self.expected,
            "actual": self.actual,
            "tolerance": self.tolerance,
            "relation": self.relation,
            "pass": self.passed,
        }


@dataclass
class Report:
    scenario: str
    checks: list[Check] = field(default_factory=list)
    data: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def exit_status(self) -> int:
        return EXIT_OK if self.ok else EXIT_FAILED

    def check(self, name, expected, actual, tolerance, relation="=="):
        self.checks.append(Check(name, float(expected), float(actual), float(tolerance), relation))

    def as_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "status": "pass" if self.ok else "fail",
            "checks": [c.as_dict() for c in self.checks],
            "data": _plain(self.data),
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2)

    def summary(self) -> str:
        lines = [f"{self.scenario}: {'PASS' if self.ok else 'FAIL'}"]
        for c in self.checks:
            mark = "ok  " if c.passed else "FAIL"
            lines.append(f"  [{mark}] {c.name}: {c.actual:.6g} {c.relation} {c.expected:.6g} (tol {c.tolerance:.1e})")
        return "\n".join(lines)


def _plain(x):
    """Recursively convert numpy values into JSON-ready Python values."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        if np.iscomplexobj(x):
            return matrixio.encode_matrix(x) if x.ndim else [float(x.real), float(x.imag)]
        return _plain(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, (np.integer, np.bool_)):
        return x.item()
    return x


# --- input resolution ------------------------------------------------------------


def fixture_names() -> list[str]:
    root = resources.files("qmops") / "fixtures"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def _read_doc(source: str) -> matrixio.MatrixDoc:
    try:
        if source == "-":
            return matrixio.loads(sys.stdin.read())
        path = Path(source)
        if path.is_file():
            return matrixio.load(path)
        name = source[:-5] if source.endswith(".json") else source
        fixture = resources.files("qmops") / "fixtures" / f"{name}.json"
        if fixture.is_file():
            return matrixio.loads(fixture.read_text())
    except OSError as exc:
        raise InputError(f"cannot read {source!r}: {exc}") from None
    except matrixio.SchemaError as exc:
        raise InputError(f"{source}: {exc}") from None
    raise InputError(f"{source!r} is neither a file nor a bundled fixture ({', '.join(fixture_names())})")


def _convert(source: str, fn):
    doc = _read_doc(source)
    try:
        return fn(doc)
    except QMError as exc:
        raise InputError(f"{source}: {exc}") from None


def load_state(source: str, rng, dims=(2,)) -> states.DensityOperator:
    if source == "random":
        d = math.prod(dims)
        return states.DensityOperator(rand.random_density(d, rng=rng), tuple(dims))
    return _convert(source, matrixio.to_density)


def load_instrument(source: str) -> measurements.Instrument:
    return _convert(source, matrixio.to_instrument)


def load_channel(source: str):
    return _convert(source, matrixio.to_channel)


def _parse_complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise InputError(f"cannot parse {text!r} as a complex number") from None


# --- scenarios ------------------------------------------------------------------


def _tol(args, default: float) -> float:
    return args.tol if args.tol is not None else default


def run_validate(args, rng) -> Report:
    rep = Report("validate")
    source = args.state or "bell"
    doc = _read_doc(source)
    if doc.kind in ("povm", "instrument"):
        mats = [m for _, m in doc.elements]
        diag = measurements.check_povm(mats) if doc.kind == "povm" else measurements.check_instrument(mats)
        names = ("hermiticity", "positivity", "completeness") if doc.kind == "povm" else ("completeness",)
    elif doc.kind == "kraus":
        diag = channels.check_channel([m for _, m in doc.elements])
        names = ("completeness",)
    elif doc.kind in ("state", "density"):
        m = doc.data if doc.kind == "density" else linalg.projector(doc.data)
        diag = states.check_density(m)
        names = ("hermiticity", "positivity", "trace")
    else:
        raise InputError(f"{source}: nothing to validate for kind {doc.kind!r}")
    for name in names:
        rep.check(name, 0.0, diag.violations.get(name, 0.0), 0.0)
    rep.data = {"kind": doc.kind, "dims": list(doc.dims), "diagnostic": str(diag)}
    return rep


def run_reduce(args, rng) -> Report:
    rep = Report("reduce")
    rho = load_state(args.state or "bell", rng, dims=(2, 2))
    keep = args.keep
    reduced = states.reduce(rho, keep)
    mu, s = states.purity_and_entropy(reduced, args.log_base)
    rep.check("trace", 1.0, np.trace(reduced.mat).real, _tol(args, 1e-12))
    rep.check("hermiticity", 0.0, linalg.hermiticity_violation(reduced.mat), _tol(args, 1e-12))
    rep.data = {"keep": keep, "dims": list(reduced.dims), "reduced": reduced.mat, "purity": mu, "entropy": s, "log_base": str(args.log_base)}
    return rep


def run_purify(args, rng) -> Report:
    rep = Report("purify")
    rho = load_state(args.state or "random", rng, dims=(3,))
    phi, (d, k) = states.purify(rho)
    big = states.pure(phi, (d, k))
    back = states.reduce(big, 0)
    mu, s = states.purity_and_entropy(rho, args.log_base)
    _, s_anc = states.purity_and_entropy(states.reduce(big, 1), args.log_base)
    rep.check("norm", 1.0, np.linalg.norm(phi), _tol(args, 1e-12))
    rep.check("reduce_residual", 0.0, linalg.max_abs_diff(back.mat, rho.mat), _tol(args, 1e-10), "<=")
    rep.check("entropy_match", s, s_anc, _tol(args, 1e-9))
    rep.data = {"dims": [d, k], "purity": mu, "entropy": s, "log_base": str(args.log_base), "vector": phi}
    return rep


def run_naimark(args, rng) -> Report:
    rep = Report("naimark")
    inst = load_instrument(args.instrument or "trine")
    povm = measurements.detection_to_povm(inst)
    ext = measurements.canonical_naimark(inst)
    rho = load_state(args.state or "random", rng, dims=(inst.dim,))
    tol = _tol(args, 1e-8)
    recovery = max(linalg.max_abs_diff(a, b) for a, b in zip(ext.recovered_povm(), povm.elements))
    rep.check("unitarity", 0.0, linalg.unitarity_deviation(ext.global_unitary), tol, "<=")
    rep.check("povm_recovery", 0.0, recovery, tol, "<=")
    direct = measurements.born_rule(rho, povm)
    via_ext = measurements.extension_statistics(ext, rho)
    rep.check("statistics", 0.0, float(np.max(np.abs(direct - via_ext))), tol, "<=")
    expected = {r.label: r.conditional_state.mat for r in measurements.measure(rho, inst)}
    worst = 0.0
    for label, (p, post) in zip(ext.labels, measurements.extension_conditional_states(ext, rho)):
        if post is not None and label in expected:
            worst = max(worst, linalg.max_abs_diff(post.mat, expected[label]))
    rep.check("conditional_states", 0.0, worst, tol, "<=")
    rep.data = {"ancilla_dim": ext.ancilla_dim, "labels": list(map(str, ext.labels)), "probabilities": direct}
    return rep


def run_roulette(args, rng) -> Report:
    rep = Report("roulette")
    bases = measurements.sigma_alpha_bases(2)  # sigma_1 and sigma_2 eigenbases
    z = [0.5, 0.5]
    povm, probe = measurements.quantum_roulette(bases, z)
    rho = load_state(args.state or "random", rng)
    tol = _tol(args, 1e-10)
    rep.check("probe_projectors", 0.0, probe.projector_defect(), tol, "<=")
    stats = probe.statistics(rho)
    rep.check("probe_statistics", 0.0, float(np.max(np.abs(stats - measurements.born_rule(rho, povm)))), tol, "<=")
    worst = 0.0
    for x in range(povm.dim):
        p, post = probe.post_state(rho, x)
        q, mixed = measurements.roulette_mixed_post_state(bases, z, rho, x)
        worst = max(worst, abs(p - q), linalg.max_abs_diff(post.mat, mixed.mat))
    rep.check("mixed_post_states", 0.0, worst, tol, "<=")
    defect = max(linalg.max_abs_diff(e @ e, e) for e in povm.elements)
    rep.check("non_projective_witness", 0.0, defect, tol, ">")
    rep.data = {"weights": z, "probabilities": stats, "povm": list(povm.elements)}
    return rep


def run_heisenberg(args, rng) -> Report:
    rep = Report("heisenberg")
    basis_a = np.eye(2, dtype=complex)
    basis_b = measurements.sigma_alpha_bases(1)[0]
    inst = measurements.heisenberg_instrument(basis_a, basis_b, target=0)
    rho = load_state(args.state or "random", rng)
    tol = _tol(args, 1e-12)
    projective = measurements.born_rule(rho, measurements.detection_to_povm(measurements.projective_instrument(basis_a)))
    probs = measurements.born_rule(rho, measurements.detection_to_povm(inst))
    rep.check("statistics_match_A", 0.0, float(np.max(np.abs(probs - projective))), tol, "<=")
    target = linalg.projector(basis_b[:, 0])
    worst = max(linalg.max_abs_diff(r.conditional_state.mat, target) for r in measurements.measure(rho, inst))
    rep.check("post_state_is_b", 0.0, worst, tol, "<=")
    rep.data = {"probabilities": probs, "post_state": target}
    return rep


def run_choi(args, rng) -> Report:
    rep = Report("choi")
    ch = load_channel(args.channel or "depolarizing-0.75")
    c = channels.choi(ch)
    verdict = channels.is_completely_positive(c)
    tol = _tol(args, 1e-9)
    rep.check("choi_trace", 1.0, np.trace(c.mat).real, tol)
    rep.check("completely_positive", 0.0, verdict.min_eigenvalue, tol, ">=")
    data = {"input_dim": c.input_dim, "choi": c.mat, "eigenvalues": c.eigenvalues(), "min_eigenvalue": verdict.min_eigenvalue}
    if verdict:
        rebuilt = channels.kraus_from_choi(c)
        x = rand.random_hermitian(c.input_dim, rng)
        rep.check("kraus_action", 0.0, linalg.max_abs_diff(rebuilt(x), ch(x)), tol, "<=")
        rep.check("kraus_count", c.input_dim**2, len(rebuilt), 0, "<=")
        data["kraus_count"] = len(rebuilt)
    else:
        data["witness"] = verdict.witness
    rep.data = data
    return rep


def run_dilate(args, rng) -> Report:
    rep = Report("dilate")
    ch = load_channel(args.channel or "depolarizing-0.75")
    if not isinstance(ch, channels.KrausChannel):
        raise InputError("dilate needs a Kraus channel")
    try:
        dil = channels.stinespring(ch)
    except QMError as exc:
        raise InputError(str(exc)) from None
    rho = load_state(args.state or "random", rng, dims=(ch.dim,))
    tol = _tol(args, 1e-9)
    rep.check("unitarity", 0.0, linalg.unitarity_deviation(dil.global_unitary), tol, "<=")
    rep.check("two_path", 0.0, linalg.max_abs_diff(dil.apply(rho.mat), ch(rho.mat)), tol, "<=")
    rep.data = {"ancilla_dim": dil.ancilla_dim, "ancilla_state": dil.ancilla_state, "output": ch(rho.mat)}
    return rep


def run_depolarize(args, rng) -> Report:
    rep = Report("depolarize")
    gamma = 0.75 if args.gamma is None else args.gamma
    try:
        ch = channels.depolarizing(gamma)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    rho = load_state(args.state or "random", rng)
    p = channels.depolarizing_contraction(gamma)
    out = channels.apply(ch, rho)
    closed = p * rho.mat + (1 - p) * np.eye(2) / 2
    tol = _tol(args, 1e-12)
    rep.check("closed_form", 0.0, linalg.max_abs_diff(out.mat, closed), tol, "<=")
    mu_in, _ = states.purity_and_entropy(rho)
    mu_out, _ = states.purity_and_entropy(out)
    rep.check("purity_non_increasing", mu_in, mu_out, tol, "<=")
    if abs(p) <= 1e-15:
        rep.check("output_maximally_mixed", 0.0, linalg.max_abs_diff(out.mat, np.eye(2) / 2), tol, "<=")
    rep.data = {"gamma": gamma, "p": p, "input": rho.mat, "output": out.mat, "purity_in": mu_in, "purity_out": mu_out}
    return rep


def run_ppt(args, rng) -> Report:
    rep = Report("ppt")
    rho = load_state(args.state or "bell", rng, dims=(2, 2))
    if len(rho.dims) < 2:
        raise InputError("ppt needs a state with at least two factors in dims")
    res = channels.ppt_check(rho)
    pt = linalg.partial_transpose(rho.mat, rho.dims, 1)
    tol = _tol(args, 1e-10)
    rep.check("trace_preserved", 1.0, np.trace(pt).real, tol)
    rep.check("involution", 0.0, linalg.max_abs_diff(linalg.partial_transpose(pt, rho.dims, 1), rho.mat), tol, "<=")
    rep.data = {"min_eig": res.min_eigenvalue, "npt": res.npt, "eigenvalues": res.eigenvalues, "partial_transpose": pt}
    return rep


def run_joint_demo(args, rng) -> Report:
    rep = Report("joint-demo")
    alpha = _parse_complex(args.alpha) if args.alpha is not None else 1.0
    try:
        space = cv.build_fock(args.cutoff)
        psi = cv.coherent_state(alpha, space)
    except (QMError, ValueError) as exc:
        raise InputError(str(exc)) from None
    pair = cv.joint_pair(space)
    rho_a = states.pure(psi)
    rho_b = states.pure(space.fock(0))
    jr = cv.joint_statistics(pair, rho_a, rho_b)
    d = jr.direct
    rep.check("varX_two_path", jr.varX_rhs, d.varX, _tol(args, 1e-6))
    rep.check("varY_two_path", jr.varY_rhs, d.varY, _tol(args, 1e-6))
    rep.check("lower_bound", jr.lower_bound, d.product, _tol(args, 1e-9), ">=")
    rep.check("product_equals_commutator_sq", 1.0, d.product, _tol(args, 2e-6))
    rep.check("four_times_single_bound", 4 * jr.intrinsic_bound, d.product, _tol(args, 2e-6))
    rep.data = {"alpha": complex(alpha), "cutoff": space.cutoff, **jr.as_dict()}
    return rep


def run_sample(args, rng) -> Report:
    rep = Report("sample")
    inst = load_instrument(args.instrument or "trine")
    rho = load_state(args.state or "random", rng, dims=(inst.dim,))
    shots = args.shots
    if shots < 1:
        raise InputError("--shots must be positive")
    sr = measurements.sample_outcomes(rho, inst, shots, args.seed)
    sigma = sr.sigma_bound(5.0)
    for label, f, p, s in zip(sr.labels, sr.frequencies, sr.probabilities, sigma):
        rep.check(f"frequency[{label}]", p, f, s if args.tol is None else args.tol)
    rep.data = {"shots": shots, "seed": args.seed, "labels": list(map(str, sr.labels)), "counts": sr.counts, "probabilities": sr.probabilities}
    return rep


SCENARIOS = {
    "validate": run_validate,
    "reduce": run_reduce,
    "purify": run_purify,
    "naimark": run_naimark,
    "roulette": run_roulette,
    "heisenberg": run_heisenberg,
    "choi": run_choi,
    "dilate": run_dilate,
    "depolarize": run_depolarize,
    "ppt": run_ppt,
    "joint-demo": run_joint_demo,
    "sample": run_sample,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qmops", description=__doc__.splitlines()[0])
    ap.add_argument("scenario", choices=sorted(SCENARIOS), help="scenario to run")
    ap.add_argument("--seed", type=int, default=0, help="seed for random inputs and sampling")
    ap.add_argument("--tol", type=float, default=None, help="override every check and validation tolerance")
    ap.add_argument("--log-base", choices=["e", "2"], default="e", help="entropy logarithm base")
    ap.add_argument("--cutoff", type=int, default=cv.DEFAULT_CUTOFF, help="Fock-space photon cutoff N")
    ap.add_argument("--state", help="state: file path, '-' for stdin, fixture name, or 'random'")
    ap.add_argument("--instrument", help="POVM or instrument: file path, '-' or fixture name")
    ap.add_argument("--channel", help="Kraus or superoperator channel: file path, '-' or fixture name")
    ap.add_argument("--gamma", type=float, help="depolarizing strength in [0, 1]")
    ap.add_argument("--alpha", help="coherent amplitude, e.g. 1 or 1+1i")
    ap.add_argument("--shots", type=int, default=100_000, help="number of samples")
    ap.add_argument("--keep", type=int, default=0, help="factor kept by reduce")
    return ap


def run_scenario(name: str, argv: list[str] | None = None) -> Report:
    """Run a scenario with CLI-style flags and return its report (raises on input errors)."""
    args = build_parser().parse_args([name, *(argv or [])])
    return _run(args)


def _run(args) -> Report:
    rng = np.random.default_rng(args.seed)
    overrides = {}
    if args.tol is not None:
        overrides = {"herm": args.tol, "orth": args.tol, "pos": args.tol}
    with tolerances(**overrides):
        return SCENARIOS[args.scenario](args, rng)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        report = _run(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except QMError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    sys.stdout.write(report.to_json() + "\n")
    print(report.summary(), file=sys.stderr)
    return report.exit_status


if __name__ == "__main__":
    sys.exit(main())
