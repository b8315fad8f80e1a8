"""Command-line front end: configured experiments, seeded parallel runs,
CSV/JSON emission.

Every subcommand accepts --config (flat key=value text, keys matching the
command's options), --seed, --shots, --threads, --out and --dry-run.
Results are CSV with a stable header; identical config and seed produce
identical bytes regardless of --threads.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from . import configio
from .noise import (
    NoiseParams,
    REGIME_PRESETS,
    cnot_channel,
    crosstalk_rates,
    idle_channel,
    prep_channels,
    toffoli_channel,
    x_measurement,
    z_measurement,
    zrot_cz_channels,
)

USAGE_ERROR = 2


def _params(regime_opt, loss_ratio, alpha_sq, dephasing, n_th) -> NoiseParams:
    if regime_opt is not None:
        preset = REGIME_PRESETS[f"REGIME{regime_opt}"]
        if loss_ratio is not None or alpha_sq != 8.0:
            raise click.UsageError("--regime fixes loss-ratio and alpha-sq")
        return preset
    if loss_ratio is None:
        raise click.UsageError("provide --regime or --loss-ratio")
    return NoiseParams(loss_ratio=loss_ratio, alpha_sq=alpha_sq,
                       dephasing_ratio=dephasing, n_th=n_th)


def _common(f):
    f = click.option("--config", type=click.Path(exists=True), default=None,
                     help="key=value file; keys override option defaults")(f)
    f = click.option("--seed", type=int, default=2026, show_default=True)(f)
    f = click.option("--shots", type=int, default=10000, show_default=True)(f)
    f = click.option("--threads", type=int, default=0,
                     help="worker processes; 0 = auto")(f)
    f = click.option("--out", type=click.Path(), default=None,
                     help="write CSV here instead of stdout")(f)
    f = click.option("--dry-run", is_flag=True,
                     help="validate configuration and exit")(f)
    return f


def _noise_opts(f):
    f = click.option("--regime", "regime_opt", type=click.IntRange(1, 3),
                     default=None, help="preset 1, 2 or 3")(f)
    f = click.option("--loss-ratio", type=float, default=None,
                     help="kappa1/kappa2")(f)
    f = click.option("--alpha-sq", type=float, default=8.0, show_default=True)(f)
    f = click.option("--dephasing", type=float, default=0.0, show_default=True)(f)
    f = click.option("--n-th", type=float, default=0.0, show_default=True)(f)
    return f


def _apply_config(ctx_params: dict, config_path):
    if not config_path:
        return ctx_params
    file_values = configio.load_config(config_path)
    for key, value in file_values.items():
        pykey = key.replace("-", "_")
        if pykey not in ctx_params:
            raise click.UsageError(f"unknown config key {key!r}")
        current = ctx_params[pykey]
        if isinstance(current, bool):
            ctx_params[pykey] = value.lower() in ("1", "true", "yes")
        elif isinstance(current, int) and not isinstance(current, bool):
            ctx_params[pykey] = int(value)
        elif isinstance(current, float):
            ctx_params[pykey] = float(value)
        else:
            ctx_params[pykey] = type(current)(value) if current is not None \
                else _auto(value)
    return ctx_params


def _auto(value: str):
    for cast in (int, float):
        try:
            return cast(value)
        except ValueError:
            continue
    return value


def _emit(text: str, out):
    if out:
        Path(out).write_text(text)
    else:
        click.echo(text, nl=False)


@click.group()
def main():
    """Circuit-level QEC simulation and resource estimation for
    biased-noise cat qubits."""


@main.command()
@_noise_opts
@click.option("--g2-mhz", type=float, default=1.0, show_default=True,
              help="g2/2pi in MHz for crosstalk rates")
@_common
def rates(regime_opt, loss_ratio, alpha_sq, dephasing, n_th, g2_mhz,
          config, seed, shots, threads, out, dry_run):
    """Closed-form gate/measurement error rates and times."""
    opts = _apply_config(dict(regime_opt=regime_opt, loss_ratio=loss_ratio,
                              alpha_sq=alpha_sq, dephasing=dephasing,
                              n_th=n_th, g2_mhz=g2_mhz), config)
    p = _params(opts["regime_opt"], opts["loss_ratio"], opts["alpha_sq"],
                opts["dephasing"], opts["n_th"])
    if dry_run:
        click.echo("ok")
        return
    rows = []
    cnot, t_cnot = cnot_channel(p)
    rows.append(["cnot", "gate_time_s", t_cnot])
    for label in sorted(cnot.probs):
        rows.append(["cnot", label, cnot.prob(label)])
    tof = toffoli_channel(p)
    for label in sorted(tof.probs):
        rows.append(["toffoli", label, tof.prob(label)])
    preps = prep_channels(p)
    rows.append(["prep_plus", "Z1", preps["plus"].prob("Z1")])
    rows.append(["prep_plus", "time_s", preps["plus_time"]])
    rows.append(["prep_zero", "X1", preps["zero"].prob("X1")])
    rows.append(["prep_zero", "time_s", preps["zero_time"]])
    idle = idle_channel(p, t_cnot) if t_cnot != float("inf") else None
    if idle is not None:
        for label in sorted(idle.probs):
            rows.append(["idle_cnot_time", label, idle.prob(label)])
    zcz = zrot_cz_channels(p)
    rows.append(["z_gate", "Z1", zcz["z"].prob("Z1")])
    for label in sorted(zcz["cz"].probs):
        rows.append(["cz_gate", label, zcz["cz"].prob(label)])
    rows.append(["z_meas", "flip_prob", z_measurement(p.alpha_sq).flip_prob])
    if p.regime_preset:
        for code in ("repetition", "surface"):
            meas = x_measurement(p, code)
            rows.append([f"x_meas_{code}", "flip_prob", meas.flip_prob])
            rows.append([f"x_meas_{code}", "idle_time_s", meas.idle_time])
    pd, pt = crosstalk_rates(opts["g2_mhz"], p.alpha_sq)
    rows.append(["crosstalk", "p_double", pd])
    rows.append(["crosstalk", "p_triple", pt])
    _emit(configio.write_csv(["operation", "quantity", "value"], rows), out)


def _mc_rows(params_desc: list, result) -> str:
    header = [k for k, _ in params_desc] + ["shots", "failures", "rate", "stderr"]
    row = [v for _, v in params_desc] + [result.shots, result.failures,
                                         result.rate, result.stderr]
    return header, row


@main.command("memory-rep")
@click.option("-d", "--distance", type=int, default=3, show_default=True)
@_noise_opts
@_common
def memory_rep(distance, regime_opt, loss_ratio, alpha_sq, dephasing, n_th,
               config, seed, shots, threads, out, dry_run):
    """Repetition-code logical-Z memory (adaptive rounds + MWPM)."""
    opts = _apply_config(dict(distance=distance, regime_opt=regime_opt,
                              loss_ratio=loss_ratio, alpha_sq=alpha_sq,
                              dephasing=dephasing, n_th=n_th), config)
    p = _params(opts["regime_opt"], opts["loss_ratio"], opts["alpha_sq"],
                opts["dephasing"], opts["n_th"])
    d = opts["distance"]
    if d < 3 or d % 2 == 0:
        raise click.UsageError("distance must be odd and >= 3")
    if dry_run:
        click.echo("ok")
        return
    from .experiments import MemoryRepExperiment, run_experiment

    res = run_experiment(MemoryRepExperiment, dict(d=d, params=p),
                         shots, seed, threads)
    header, row = _mc_rows(
        [("d", d), ("loss_ratio", p.loss_ratio), ("seed", seed)], res)
    header.append("mean_rounds")
    row.append(res.extra.get("rounds", 0) / max(1, res.shots))
    _emit(configio.write_csv(header, [row]), out)


@main.command("memory-surface")
@click.option("--dx", type=int, default=3, show_default=True)
@click.option("--dz", type=int, default=3, show_default=True)
@click.option("--rounds", type=int, default=None, help="default d_z")
@click.option("--g2-mhz", type=float, default=None,
              help="enable crosstalk at this coupling")
@_noise_opts
@_common
def memory_surface(dx, dz, rounds, g2_mhz, regime_opt, loss_ratio, alpha_sq,
                   dephasing, n_th, config, seed, shots, threads, out, dry_run):
    """Thin surface-code logical-Z memory (fixed rounds + MWPM)."""
    opts = _apply_config(dict(dx=dx, dz=dz, rounds=rounds, g2_mhz=g2_mhz,
                              regime_opt=regime_opt, loss_ratio=loss_ratio,
                              alpha_sq=alpha_sq, dephasing=dephasing,
                              n_th=n_th), config)
    p = _params(opts["regime_opt"], opts["loss_ratio"], opts["alpha_sq"],
                opts["dephasing"], opts["n_th"])
    if dry_run:
        click.echo("ok")
        return
    from .experiments import MemorySurfaceExperiment, run_experiment

    res = run_experiment(
        MemorySurfaceExperiment,
        dict(dx=opts["dx"], dz=opts["dz"], params=p, rounds=opts["rounds"],
             g2_mhz=opts["g2_mhz"]),
        shots, seed, threads)
    header, row = _mc_rows(
        [("dx", opts["dx"]), ("dz", opts["dz"]),
         ("loss_ratio", p.loss_ratio),
         ("g2_mhz", opts["g2_mhz"] if opts["g2_mhz"] is not None else 0.0),
         ("seed", seed)], res)
    _emit(configio.write_csv(header, [row]), out)


@main.command()
@click.option("--code", type=click.Choice(["repetition", "surface"]),
              default="repetition", show_default=True)
@click.option("-d", "--distance", type=int, default=5, show_default=True)
@click.option("--dm", type=int, default=4, show_default=True)
@click.option("--ell", type=int, default=None)
@_noise_opts
@_common
def surgery(code, distance, dm, ell, regime_opt, loss_ratio, alpha_sq,
            dephasing, n_th, config, seed, shots, threads, out, dry_run):
    """Lattice-surgery timelike failure rate in the merge window."""
    opts = _apply_config(dict(code=code, distance=distance, dm=dm, ell=ell,
                              regime_opt=regime_opt, loss_ratio=loss_ratio,
                              alpha_sq=alpha_sq, dephasing=dephasing,
                              n_th=n_th), config)
    p = _params(opts["regime_opt"], opts["loss_ratio"], opts["alpha_sq"],
                opts["dephasing"], opts["n_th"])
    from .surgery import SurgeryConfig, TimelikeExperiment

    cfg = SurgeryConfig(opts["code"], opts["distance"], opts["dm"], opts["ell"])
    if dry_run:
        click.echo("ok")
        return
    from .experiments import run_experiment

    res = run_experiment(TimelikeExperiment, dict(cfg=cfg, params=p),
                         shots, seed, threads)
    header, row = _mc_rows(
        [("code", cfg.kind), ("d", cfg.d), ("d_m", cfg.d_m),
         ("loss_ratio", p.loss_ratio), ("seed", seed)], res)
    _emit(configio.write_csv(header, [row]), out)


@main.command()
@click.option("-d", "--distance", type=int, default=3, show_default=True)
@_noise_opts
@_common
def butoff(distance, regime_opt, loss_ratio, alpha_sq, dephasing, n_th,
           config, seed, shots, threads, out, dry_run):
    """Bottom-up TOF-state preparation statistics."""
    opts = _apply_config(dict(distance=distance, regime_opt=regime_opt,
                              loss_ratio=loss_ratio, alpha_sq=alpha_sq,
                              dephasing=dephasing, n_th=n_th), config)
    p = _params(opts["regime_opt"], opts["loss_ratio"], opts["alpha_sq"],
                opts["dephasing"], opts["n_th"])
    if dry_run:
        click.echo("ok")
        return
    from .butoff import PATTERN_NAMES, ButoffExperiment
    from .experiments import run_experiment, wilson

    res = run_experiment(ButoffExperiment, dict(d=opts["distance"], params=p),
                         shots, seed, threads)
    accepted = res.extra.get("accepted", 0)
    lo, hi = wilson(accepted, res.shots)
    header = ["d", "loss_ratio", "seed", "shots", "accepted", "p_accept",
              "stderr"] + [f"n_{name}" for name in PATTERN_NAMES]
    row = [opts["distance"], p.loss_ratio, seed, res.shots, accepted,
           accepted / max(1, res.shots), (hi - lo) / 2]
    row += [res.extra.get(f"n_{name}", 0) for name in PATTERN_NAMES]
    _emit(configio.write_csv(header, [row]), out)


@main.command()
@click.option("--depolarizing", "depol", type=float, default=None,
              help="i.i.d. depolarizing strength per input state")
@click.option("--eps1", type=float, default=None,
              help="Z_A probability of the biased input model")
@click.option("--eps2", type=float, default=0.0,
              help="total probability of the other six patterns")
@click.option("--tailored/--untailored", default=True, show_default=True)
@click.option("--g-matrices", type=click.Path(exists=True), default=None,
              help="plain-text file with three stacked binary matrices")
@click.option("--t-max", type=int, default=None,
              help="truncate the enumeration at this many fault locations")
@_common
def distill(depol, eps1, eps2, tailored, g_matrices, t_max,
            config, seed, shots, threads, out, dry_run):
    """Exact 8-to-2 distillation acceptance/fidelity."""
    opts = _apply_config(dict(depol=depol, eps1=eps1, eps2=eps2,
                              tailored=tailored, t_max=t_max), config)
    from . import distill as dst

    if g_matrices:
        mats = configio.matrix_from_text(Path(g_matrices).read_text())
        if len(mats) != 3:
            raise click.UsageError("need exactly three G matrices")
        trio = dst.GTrio(g=tuple(mats), k=mats[0].shape[0] - 1)
    else:
        trio = dst.paper_trio()
    if opts["depol"] is not None:
        dist = dst.depolarizing(opts["depol"], trio.n)
    elif opts["eps1"] is not None:
        dist = dst.z_only(opts["eps1"], opts["eps2"], trio.n)
    else:
        raise click.UsageError("provide --depolarizing or --eps1")
    if dry_run:
        click.echo("ok")
        return
    if opts["tailored"]:
        dist = dst.tailor(dist, dst.paper_symmetries())
    if opts["t_max"] is not None:
        res = dst.enumerate_truncated(dist, trio, opts["t_max"])
    else:
        res = dst.enumerate_exact(dist, trio)
    rows = [["p_acc", res.p_acc], ["fidelity", res.fidelity],
            ["eps_td", res.eps_td],
            ["truncation_bound", res.truncation_bound]]
    for pattern, prob in sorted(res.output_dist.items()):
        if pattern:
            rows.append([f"output_u{pattern:#04x}", prob])
    _emit(configio.write_csv(["quantity", "value"], rows), out)


@main.command()
@click.option("--n-logical", type=int, default=128, show_default=True)
@click.option("--n-tof", type=float, default=1.8e5, show_default=True)
@click.option("--n-t", type=float, default=1.7e6, show_default=True)
@click.option("--ancilla-logical", type=int, default=None)
@click.option("--z-budget", type=float, default=2e-11, show_default=True)
@click.option("--x-budget", type=float, default=1e-10, show_default=True)
@click.option("--d-bu", type=int, default=5)
@click.option("--d-rep", type=int, default=5)
@click.option("--factory-d-z", type=int, default=7)
@click.option("--factory-big-d-z", type=int, default=15)
@click.option("--factory-d-m", type=int, default=11)
@click.option("--modules", type=int, default=10)
@click.option("--extra-rounds", type=int, default=1)
@click.option("--factory-ats", type=int, default=1596)
@click.option("--routing-factor", type=float, default=1.3, show_default=True)
@_noise_opts
@_common
def overhead(n_logical, n_tof, n_t, ancilla_logical, z_budget, x_budget,
             d_bu, d_rep, factory_d_z, factory_big_d_z, factory_d_m, modules,
             extra_rounds, factory_ats, routing_factor, regime_opt,
             loss_ratio, alpha_sq, dephasing, n_th,
             config, seed, shots, threads, out, dry_run):
    """End-to-end resource estimate: one CSV row of the algorithm table."""
    opts = _apply_config(
        dict(n_logical=n_logical, n_tof=n_tof, n_t=n_t,
             ancilla_logical=ancilla_logical, z_budget=z_budget,
             x_budget=x_budget, d_bu=d_bu, d_rep=d_rep,
             factory_d_z=factory_d_z, factory_big_d_z=factory_big_d_z,
             factory_d_m=factory_d_m, modules=modules,
             extra_rounds=extra_rounds, factory_ats=factory_ats,
             routing_factor=routing_factor, regime_opt=regime_opt,
             loss_ratio=loss_ratio, alpha_sq=alpha_sq,
             dephasing=dephasing, n_th=n_th), config)
    p = _params(opts["regime_opt"], opts["loss_ratio"], opts["alpha_sq"],
                opts["dephasing"], opts["n_th"])
    from .overhead import (AlgorithmSpec, FactoryConfig, ats_count,
                           cycle_times, factory_epsilon_td, runtime,
                           select_distances, tof_budget)

    spec = AlgorithmSpec(n_logical=opts["n_logical"], n_tof=opts["n_tof"],
                         n_t=opts["n_t"],
                         ancilla_logical=opts["ancilla_logical"],
                         routing_factor=opts["routing_factor"])
    factory = FactoryConfig(
        d_bu=opts["d_bu"], d_rep=opts["d_rep"], d_z=opts["factory_d_z"],
        big_d_z=opts["factory_big_d_z"], d_m=opts["factory_d_m"],
        modules=opts["modules"], extra_rounds=opts["extra_rounds"],
        n_ats=opts["factory_ats"])
    if dry_run:
        click.echo("ok")
        return
    sel = select_distances(p, opts["z_budget"], opts["x_budget"])
    times = cycle_times(p, factory)
    fact = factory_epsilon_td(p, factory)
    rt = runtime(spec, times["t_td_per_tof"], times["t_surf"], sel["d_m"])
    counts = ats_count(spec, sel["d_x"], sel["d_z"], factory)
    header = ["n_logical", "n_tof", "n_t", "tau", "d_x", "d_z", "d_m",
              "t_surf_us", "t_td_per_tof_us", "eps_td", "factory_p_acc",
              "n_ats", "n_pcdr", "runtime_min", "bottleneck"]
    row = [spec.n_logical, spec.n_tof, spec.n_t,
           tof_budget(spec.n_tof, spec.n_t), sel["d_x"], sel["d_z"],
           sel["d_m"], times["t_surf"] * 1e6, times["t_td_per_tof"] * 1e6,
           fact["eps_td"], fact["p_acc"], counts["n_ats"], counts["n_pcdr"],
           rt["runtime"] / 60.0, rt["bottleneck"]]
    _emit(configio.write_csv(header, [row]), out)


@main.command("graph-dump")
@click.option("--code", type=click.Choice(["repetition", "surface"]),
              default="repetition", show_default=True)
@click.option("-d", "--distance", type=int, default=3)
@click.option("--dx", type=int, default=3)
@click.option("--dz", type=int, default=3)
@click.option("--rounds", type=int, default=None)
@click.option("--graph", type=click.Choice(["X", "Z"]), default="X")
@click.option("--layout-json", is_flag=True, help="dump the layout instead")
@click.option("--g2-mhz", type=float, default=None)
@_noise_opts
@_common
def graph_dump(code, distance, dx, dz, rounds, graph, layout_json, g2_mhz,
               regime_opt, loss_ratio, alpha_sq, dephasing, n_th,
               config, seed, shots, threads, out, dry_run):
    """Dump a decoding graph as CSV (or a code layout as JSON)."""
    opts = _apply_config(dict(code=code, distance=distance, dx=dx, dz=dz,
                              rounds=rounds, graph=graph,
                              layout_json=layout_json, g2_mhz=g2_mhz,
                              regime_opt=regime_opt, loss_ratio=loss_ratio,
                              alpha_sq=alpha_sq, dephasing=dephasing,
                              n_th=n_th), config)
    p = _params(opts["regime_opt"], opts["loss_ratio"], opts["alpha_sq"],
                opts["dephasing"], opts["n_th"])
    if dry_run:
        click.echo("ok")
        return
    from .codes import build_repetition, build_surface
    from .decoder.graph import build_rep_graph, build_surface_graphs
    from .pauli_sim import GateNoise

    if opts["layout_json"]:
        layout = (build_repetition(opts["distance"])[0]
                  if opts["code"] == "repetition"
                  else build_surface(opts["dx"], opts["dz"])[0])
        _emit(layout.to_json() + "\n", out)
        return
    if opts["code"] == "repetition":
        noise = GateNoise(p, "repetition")
        r = opts["rounds"] or opts["distance"]
        g = build_rep_graph(opts["distance"], r, noise)
    else:
        noise = GateNoise(p, "surface")
        r = opts["rounds"] or opts["dz"]
        crosstalk = None
        if opts["g2_mhz"] is not None:
            crosstalk = crosstalk_rates(opts["g2_mhz"], p.alpha_sq)
        gx, gz = build_surface_graphs(opts["dx"], opts["dz"], r, noise,
                                      crosstalk)
        g = gx if opts["graph"] == "X" else gz
    _emit(g.to_csv(), out)


if __name__ == "__main__":
    sys.exit(main())
