"""Experiment runners: entropy scan, symmetry-resolved scan, teleport sweep,
noise classification and the exact oracle report.

Every random stream is keyed by ``(seed, experiment, point, circuit, run)``,
so results do not depend on the order in which worker threads finish.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

import numpy as np

from ..circuits import (
    INPUT_STATES,
    cluster_state_circuit,
    input_state_vector,
    modified_swap_test_circuit,
    swap_test_circuit,
    symmetry_resolved_probability_circuit,
    teleportation_circuit,
)
from ..core import MAX_MIXED_QUBITS, SimulationError, as_mixed, partial_trace
from ..entanglement import (
    Estimate,
    entanglement_report,
    mean_estimate,
    parity_values,
    swap_values,
    twisted_swap_values,
)
from ..execution import evolve, exact_distribution, expected_value, sample_distribution
from ..noise import NoiseModel, bias_model_predictions, make_channel, readout_bias_channel
from ..symmetry import (
    action_from_config,
    classify_channel,
    edge_flip_operators,
    group_from_config,
    measurement_bases,
    sector_projectors,
    subsystem_action,
    subsystem_operator,
)
from .config import ConfigError, ExperimentConfig
from .report import Report
from .tomography import BASES, bloch_vector, corrected_fidelity, frame_signs, teleport_branches

_STREAM = {"entropy": 1, "resolved": 2, "teleport": 3, "classify-noise": 4}

# channels checked by classify-noise when the config names none
DEFAULT_CLASSIFY = {
    "single_qubit": [{"channel": "dephasing", "p": 0.1}, {"channel": "paper_depolarizing", "p": 0.1}],
    "readout_bias": 0.07,
}


def stream(cfg: ExperimentConfig, *key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(cfg.seed, spawn_key=(_STREAM[cfg.experiment],) + key)


def _pmap(fn: Callable, items: Sequence, workers: int | None):
    """Map in a thread pool; results come back in input order."""
    if workers == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def combine(per_run: Sequence[Estimate]) -> Estimate:
    """Mean over runs with the across-run standard error; one run keeps its shot SE."""
    if len(per_run) == 1:
        return per_run[0]
    return mean_estimate(np.array([e.value for e in per_run]))


def _sample_runs(cfg, dist, n_bits, key, name=""):
    return [
        sample_distribution(dist, n_bits, cfg.shots, stream(cfg, *key, r), name)
        for r in range(cfg.runs)
    ]


def _neg_log(est: Estimate) -> tuple[float | None, float | None]:
    if est.value <= 0:
        return None, None
    return 0.0 - math.log(est.value), est.stderr / est.value


def _require(cfg: ExperimentConfig, name: str) -> None:
    if cfg.experiment != name:
        raise ConfigError(f"config is for experiment {cfg.experiment!r}, not {name!r}")


def _state_purity(cfg, noise, la) -> float | None:
    prep = cluster_state_circuit(cfg.L, cfg.boundary, cfg.state)
    if noise is not None and noise.has_gate_noise and cfg.L > MAX_MIXED_QUBITS:
        return None
    rho_a = partial_trace(evolve(prep, noise), range(la))
    return float(rho_a.purity())


# ---------------------------------------------------------------------------
# entropy scan


def run_entropy_experiment(cfg: ExperimentConfig, workers: int | None = None) -> Report:
    """Sampled ``-ln S2`` for each subsystem size, with the exact circuit oracle."""
    _require(cfg, "entropy")
    noise = cfg.noise_model()

    def point(la):
        circ = swap_test_circuit(cfg.L, la, cfg.state, cfg.boundary)
        dist = exact_distribution(circ, noise)
        runs = _sample_runs(cfg, dist, circ.n_bits, (la,), circ.name)
        purity = combine([mean_estimate(swap_values(r, la)) for r in runs])
        oracle = expected_value(dist, circ.n_bits, lambda r: swap_values(r, la)).real
        value, err = _neg_log(purity)
        row = {"L_A": la, "estimate": value, "stderr": err,
               "oracle": 0.0 - math.log(oracle) if oracle > 0 else None}
        diag = {"L_A": la, "purity": purity.value, "purity_stderr": purity.stderr,
                "purity_oracle": oracle, "state_purity": _state_purity(cfg, noise, la)}
        return row, diag

    results = _pmap(point, cfg.sizes(), workers)
    return Report("entropy", cfg.to_dict(), cfg.seed, [r for r, _ in results],
                  {"points": [d for _, d in results]})


# ---------------------------------------------------------------------------
# symmetry-resolved scan


def run_resolved_experiment(cfg: ExperimentConfig, workers: int | None = None) -> Report:
    """Sector probabilities and purities ``S~1(+-)``, ``S~2(+-)`` per subsystem size."""
    _require(cfg, "resolved")
    if cfg.boundary != "open" and cfg.state == "cluster":
        raise ConfigError("the resolved scan uses the Z2 prefix symmetry of open chains")
    noise = cfg.noise_model()
    prob_circ = symmetry_resolved_probability_circuit(cfg.L, cfg.state, cfg.boundary)
    prob_dist = exact_distribution(prob_circ, noise)
    prob_runs = _sample_runs(cfg, prob_dist, prob_circ.n_bits, (0, 0), prob_circ.name)

    def point(la):
        plain = swap_test_circuit(cfg.L, la, cfg.state, cfg.boundary)
        mod = modified_swap_test_circuit(cfg.L, la, cfg.state, cfg.boundary)
        d_plain = exact_distribution(plain, noise)
        d_mod = exact_distribution(mod, noise)
        r_plain = _sample_runs(cfg, d_plain, plain.n_bits, (la, 1), plain.name)
        r_mod = _sample_runs(cfg, d_mod, mod.n_bits, (la, 2), mod.name)

        per_run: dict[str, list[Estimate]] = {k: [] for k in ("p", "s2", "tw", "tw_im")}
        for rp, rm, rq in zip(r_plain, r_mod, prob_runs):
            tw = twisted_swap_values(rm, la)
            per_run["p"].append(mean_estimate(parity_values(rq, la)))
            per_run["s2"].append(mean_estimate(swap_values(rp, la)))
            per_run["tw"].append(mean_estimate(tw.real))
            per_run["tw_im"].append(mean_estimate(tw.imag))
        est = {k: combine(v) for k, v in per_run.items()}

        exact = {
            "p": expected_value(prob_dist, prob_circ.n_bits, lambda r: parity_values(r, la)).real,
            "s2": expected_value(d_plain, plain.n_bits, lambda r: swap_values(r, la)).real,
            "tw": expected_value(d_mod, mod.n_bits, lambda r: twisted_swap_values(r, la)).real,
        }
        rows = []
        for sector, sgn in (("+", 1), ("-", -1)):
            rows.append({
                "L_A": la, "sector": sector, "moment": 1,
                "estimate": (1 + sgn * est["p"].value) / 2,
                "stderr": est["p"].stderr / 2,
                "oracle": (1 + sgn * exact["p"]) / 2,
            })
            rows.append({
                "L_A": la, "sector": sector, "moment": 2,
                "estimate": (est["s2"].value + sgn * est["tw"].value) / 2,
                "stderr": 0.5 * math.hypot(est["s2"].stderr, est["tw"].stderr),
                "oracle": (exact["s2"] + sgn * exact["tw"]) / 2,
            })
        gap1 = Estimate(est["p"].value, est["p"].stderr)
        gap2 = Estimate(est["tw"].value, est["tw"].stderr)
        diag = {
            "L_A": la,
            "gap_s1": gap1.value, "gap_s1_stderr": gap1.stderr, "gap_s1_oracle": exact["p"],
            "gap_s2": gap2.value, "gap_s2_stderr": gap2.stderr, "gap_s2_oracle": exact["tw"],
            "degenerate_sampled": bool(all(abs(g.value) <= 3 * g.stderr for g in (gap1, gap2))),
            "degenerate_oracle": bool(abs(exact["p"]) <= 1e-8 and abs(exact["tw"]) <= 1e-8),
            "twisted_imag": est["tw_im"].value, "twisted_imag_stderr": est["tw_im"].stderr,
        }
        return rows, diag

    results = _pmap(point, cfg.sizes(), workers)
    rows = [row for rs, _ in results for row in rs]
    return Report("resolved", cfg.to_dict(), cfg.seed, rows, {"points": [d for _, d in results]})


# ---------------------------------------------------------------------------
# teleport sweep


def _teleport_point(cfg, noise, key, alpha, beta):
    t = cfg.teleport
    rows, oracle_min = [], []
    for s_idx, label in enumerate(t.states):
        psi = input_state_vector(label)
        r_in = bloch_vector(psi)
        outcomes = [dict() for _ in range(cfg.runs)]
        corrections = [dict() for _ in range(cfg.runs)]
        exact_bloch = []
        for b_idx, basis in enumerate(BASES):
            circ = teleportation_circuit(INPUT_STATES[label], alpha, beta, t.kind, t.sign, basis)
            dist = exact_distribution(circ, noise)
            runs = _sample_runs(cfg, dist, circ.n_bits, key + (s_idx, b_idx), circ.name)
            for r, rec in enumerate(runs):
                outcomes[r][basis] = rec.bits[:, 4]
                corrections[r][basis] = rec.bits[:, :4]
            exact_bloch.append(expected_value(
                dist, circ.n_bits,
                lambda rec, b=basis: (1.0 - 2.0 * rec.bits[:, 4]) * frame_signs(rec.bits[:, :4], b),
            ).real)
        fid = combine([corrected_fidelity(o, c, psi)[0] for o, c in zip(outcomes, corrections)])
        oracle = 0.5 * (1 + float(r_in @ np.array(exact_bloch)))
        rows.append({"alpha": alpha, "beta": beta, "state": label,
                     "fidelity": fid.value, "stderr": fid.stderr, "oracle": oracle})
    worst = min(rows, key=lambda r: r["fidelity"])
    rows.insert(0, {"alpha": alpha, "beta": beta, "state": "min",
                    "fidelity": worst["fidelity"], "stderr": worst["stderr"],
                    "oracle": min(r["oracle"] for r in rows)})
    diag = {"alpha": alpha, "beta": beta, "argmin": worst["state"]}
    if noise is None:
        diag["branch_min_fidelity"] = min(
            f for label in t.states
            for _, _, f in teleport_branches(label, alpha, beta, t.kind, t.sign)
        )
    return rows, diag


def run_teleport_experiment(cfg: ExperimentConfig, workers: int | None = None) -> Report:
    """Corrected output fidelity of all input states over the ``alpha`` grid.

    Each point reports the per-state fidelities and their minimum
    ``f_min`` (state ``"min"``), each with the exact oracle value.
    """
    _require(cfg, "teleport")
    noise = cfg.noise_model()
    t = cfg.teleport
    points = [
        ((m_idx, a_idx), alpha, sgn * alpha)
        for m_idx, sgn in enumerate(t.beta_signs())
        for a_idx, alpha in enumerate(t.alphas())
    ]
    results = _pmap(lambda p: _teleport_point(cfg, noise, *p), points, workers)
    rows = [row for rs, _ in results for row in rs]
    return Report("teleport", cfg.to_dict(), cfg.seed, rows, {"points": [d for _, d in results]})


# ---------------------------------------------------------------------------
# noise classification


def _classify_targets(cfg: ExperimentConfig) -> list[tuple[str, dict]]:
    spec = cfg.noise_spec() or DEFAULT_CLASSIFY
    entries = []
    single = spec.get("single_qubit")
    for entry in single if isinstance(single, list) else [single] if single else []:
        entries.append((f"{entry['channel']}({entry['p']:g})", entry))
    if spec.get("readout_bias"):
        entries.append((f"readout_bias({float(spec['readout_bias']):g})",
                        {"channel": "readout_bias", "eps": float(spec["readout_bias"])}))
    if not entries:
        raise ConfigError("classify-noise needs at least one channel")
    return entries


def run_classify_noise(cfg: ExperimentConfig, workers: int | None = None) -> Report:
    """Symmetry-preserving or breaking verdict for each channel and cut.

    Gate-class channels act on every qubit of the prepared state; readout
    bias acts on the sites of ``A`` in their measurement bases. The exact
    sector gap ``Tr[rho_A P_A]`` is reported next to the i.i.d. prediction,
    and for readout bias also sampled from the sector-probability circuit.
    """
    if cfg.L > MAX_MIXED_QUBITS:
        raise ConfigError(f"exact classification limited to L <= {MAX_MIXED_QUBITS}")
    state = as_mixed(evolve(cluster_state_circuit(cfg.L, cfg.boundary, cfg.state)))
    sizes = [la for la in cfg.sizes() if edge_flip_operators(cfg.L, cfg.boundary, la)]
    if not sizes:
        raise ConfigError("no subsystem size has an entanglement cut")

    def point(item):
        (name, entry), la = item
        t_ops = edge_flip_operators(cfg.L, cfg.boundary, la)
        p_a = subsystem_operator(cfg.L, la, cfg.state)
        row = {"L_A": la, "channel": name}
        if entry["channel"] == "readout_bias":
            eps = entry["eps"]
            bases = measurement_bases(cfg.L, la, cfg.state)
            placed = [(readout_bias_channel(eps, b), [k]) for k, b in enumerate(bases)]
            res = classify_channel(placed, state, range(la), t_ops, sector_operator=p_a)
            circ = symmetry_resolved_probability_circuit(cfg.L, cfg.state, cfg.boundary)
            dist = exact_distribution(circ, NoiseModel(readout_bias=eps))
            key = (sizes.index(la),)
            gap = combine([mean_estimate(parity_values(r, la))
                           for r in _sample_runs(cfg, dist, circ.n_bits, key, circ.name)])
            row.update(predicted_gap=bias_model_predictions(eps, la).sector_gap,
                       sampled_gap=gap.value, sampled_stderr=gap.stderr)
        else:
            ch = make_channel(entry["channel"], entry["p"])
            res = classify_channel(ch, state, range(la), t_ops, sector_operator=p_a)
            row.update(predicted_gap=0.0, sampled_gap=None, sampled_stderr=None)
        row.update(classification=res.label, witness=res.witness, sector_gap=res.sector_gap)
        return row

    items = [(e, la) for e in _classify_targets(cfg) for la in sizes]
    rows = _pmap(point, items, workers)
    return Report("classify-noise", cfg.to_dict(), cfg.seed, rows, {})


# ---------------------------------------------------------------------------
# exact oracle


def _oracle_action(cfg: ExperimentConfig, la: int):
    if cfg.symmetry:
        group = group_from_config(cfg.symmetry)
        action = cfg.symmetry.get("action") or {}
        # user actions are written for the whole chain and restricted to A
        restricted = {}
        from ..pauli import PauliString

        for element, text in action.items():
            full = PauliString.parse(str(text), cfg.L)
            restricted[element] = str(full.restrict(range(la)))
        return action_from_config(group, restricted, la)
    return subsystem_action(cfg.L, cfg.boundary, la, cfg.state)


def run_oracle(cfg: ExperimentConfig, workers: int | None = None) -> Report:
    """Exact spectra, Renyi entropies and resolved moments of the prepared state."""
    noise = cfg.noise_model()
    state = evolve(cluster_state_circuit(cfg.L, cfg.boundary, cfg.state), noise)

    def point(la):
        rho_a = partial_trace(state, range(la))
        projectors = sector_projectors(_oracle_action(cfg, la)) if la <= 8 else None
        rep = entanglement_report(rho_a, projectors)
        rows = [{"L_A": la, "quantity": "eigenvalue", "sector": "", "moment": k + 1, "value": v}
                for k, v in enumerate(rep.to_dict()["spectrum"])]
        rows += [{"L_A": la, "quantity": "renyi", "sector": "", "moment": n, "value": v}
                 for n, v in sorted(rep.renyi.items())]
        rows += [{"L_A": la, "quantity": "resolved", "sector": s, "moment": n, "value": v}
                 for (s, n), v in sorted(rep.resolved.items())]
        return rows, {"L_A": la, "degenerate": rep.degenerate, "sector_gap": rep.sector_gap}

    results = _pmap(point, cfg.sizes(), workers)
    rows = [row for rs, _ in results for row in rs]
    return Report("oracle", cfg.to_dict(), cfg.seed, rows, {"points": [d for _, d in results]})


RUNNERS = {
    "entropy": run_entropy_experiment,
    "resolved": run_resolved_experiment,
    "teleport": run_teleport_experiment,
    "classify-noise": run_classify_noise,
    "oracle": run_oracle,
}


def run_experiment(cfg: ExperimentConfig, workers: int | None = None) -> Report:
    try:
        return RUNNERS[cfg.experiment](cfg, workers)
    except SimulationError as exc:
        raise ConfigError(str(exc)) from exc
