"""Command-line entry point.

One binary exposes every pipeline with reproducible seeded runs. A flat
key=value config file supplies defaults; explicit flags override it,
and the effective configuration is echoed into every output directory
for provenance. Exit codes: 0 success, 1 runtime failure, 2 usage
error.
"""

import csv
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import frame_io
from .augment import DATASET_FAMILIES, augment_dataset
from .diffusion import (
    cosine_schedule,
    gaussian_oracle_denoiser,
    respace_schedule,
    sample,
    to_image_domain,
)
from .ef import bland_altman, exam_ef
from .metrics import (
    FrameMetrics,
    dice,
    hausdorff_mm,
    subset_report,
    write_metrics_csv,
)
from .repaint import RePaintConfig, inpaint
from .survey import ResponseStore, SurveyPlan, build_plan, summarize, summary_to_dict
from .validation import LV, MYO, LA

LABEL_BY_NAME = {"lv": LV, "myo": MYO, "la": LA}


def _load_config(path):
    values = {}
    if path is None:
        return values
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#") or "=" not in line:
            continue
        key, _, val = line.partition("=")
        values[key.strip()] = val.strip()
    return values


def _cfg(ctx, key, flag_value, default, cast=str):
    """Flag beats config file beats default."""
    if flag_value is not None:
        return flag_value
    raw = ctx.obj.get(key)
    return cast(raw) if raw is not None else default


def _echo_config(directory, values):
    lines = [f"{k}={values[k]}" for k in sorted(values)]
    Path(directory).mkdir(parents=True, exist_ok=True)
    (Path(directory) / "run_config.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")


def _build_denoiser(schedule, model, toy_denoiser, toy_mean, toy_var):
    if model is not None and toy_denoiser:
        raise click.UsageError("--model and --toy-denoiser are mutually exclusive")
    if model is not None:
        from .adapter import TorchScriptDenoiser

        return TorchScriptDenoiser(model)
    if toy_denoiser:
        return gaussian_oracle_denoiser(schedule, mean=toy_mean, var=toy_var)
    raise click.UsageError("either --model or --toy-denoiser is required")


@click.group()
@click.option("--config", type=click.Path(exists=True, dir_okay=False), default=None,
              help="flat key=value config file with default parameters")
@click.pass_context
def main(ctx, config):
    """Generative augmentation toolbox for sector ultrasound."""
    ctx.obj = _load_config(config)


@main.command("schedule-inspect")
@click.option("--T", "train_steps", type=int, default=None, help="diffusion steps")
@click.option("--inference-steps", type=int, default=None, help="respaced step count")
@click.pass_context
def schedule_inspect(ctx, train_steps, inference_steps):
    """Print cosine-schedule diagnostics."""
    train_steps = _cfg(ctx, "train_steps", train_steps, 4000, int)
    sched = cosine_schedule(train_steps)
    if inference_steps is not None:
        sched = respace_schedule(sched, inference_steps)
    abar = sched.alpha_bar
    rel_err = np.max(np.abs(abar - np.cumprod(sched.alpha)) / abar)
    click.echo(f"steps={sched.num_steps}")
    click.echo(f"alpha_bar[0]={abar[0]:.10g}")
    click.echo(f"alpha_bar[{sched.num_steps - 1}]={abar[-1]:.10g}")
    click.echo(f"monotone_decreasing={bool(np.all(np.diff(abar) < 0))}")
    click.echo(f"cumprod_max_rel_err={rel_err:.3g}")
    click.echo(f"max_beta={sched.beta.max():.6g}")


@main.command("sample")
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.option("--T", "train_steps", type=int, default=None)
@click.option("--steps", type=int, default=None, help="inference steps (respaced)")
@click.option("--size", type=int, default=256, help="output side length")
@click.option("--seed", type=int, default=None)
@click.option("--model", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--toy-denoiser", is_flag=True, help="use the analytic Gaussian oracle")
@click.option("--toy-mean", type=float, default=0.0)
@click.option("--toy-var", type=float, default=0.25)
@click.pass_context
def sample_cmd(ctx, out, train_steps, steps, size, seed, model, toy_denoiser, toy_mean, toy_var):
    """Draw one unconditional sample and write it as PNG."""
    train_steps = _cfg(ctx, "train_steps", train_steps, 4000, int)
    seed = _cfg(ctx, "seed", seed, 0, int)
    steps = _cfg(ctx, "steps", steps, None, int)
    sched = cosine_schedule(train_steps)
    denoiser = _build_denoiser(sched, model, toy_denoiser, toy_mean, toy_var)
    run = respace_schedule(sched, steps) if steps else sched
    try:
        x = sample(run, denoiser, (size, size), np.random.default_rng(seed))
    except Exception as exc:
        raise click.ClickException(f"sampling failed: {exc}") from exc
    frame_io.save_image_png(out, to_image_domain(x))
    click.echo(f"wrote {out}")


@main.command("inpaint")
@click.option("--image", "image_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--keep-mask", "mask_path", type=click.Path(exists=True, dir_okay=False), required=True,
              help="PNG; nonzero pixels are preserved, zero pixels synthesized")
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.option("--T", "train_steps", type=int, default=None)
@click.option("--steps", type=int, default=None)
@click.option("--jump", type=int, default=None)
@click.option("--resamples", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--model", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--toy-denoiser", is_flag=True)
@click.option("--toy-mean", type=float, default=0.0)
@click.option("--toy-var", type=float, default=0.25)
@click.pass_context
def inpaint_cmd(ctx, image_path, mask_path, out, train_steps, steps, jump, resamples, seed,
                model, toy_denoiser, toy_mean, toy_var):
    """Synthesize the masked-out region of one image."""
    train_steps = _cfg(ctx, "train_steps", train_steps, 4000, int)
    config = RePaintConfig(
        jump_length=_cfg(ctx, "jump", jump, 10, int),
        n_resamples=_cfg(ctx, "resamples", resamples, 10, int),
        inference_steps=_cfg(ctx, "steps", steps, 250, int),
    )
    seed = _cfg(ctx, "seed", seed, 0, int)
    sched = cosine_schedule(train_steps)
    denoiser = _build_denoiser(sched, model, toy_denoiser, toy_mean, toy_var)
    image = frame_io.load_image_png(image_path)
    keep = frame_io.load_mask_png(mask_path) > 0
    try:
        result = inpaint(sched, denoiser, image, keep, config, np.random.default_rng(seed))
    except Exception as exc:
        raise click.ClickException(f"inpainting failed: {exc}") from exc
    frame_io.save_image_png(out, result)
    click.echo(f"wrote {out}")


@main.command("augment")
@click.option("--input", "input_dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--output", "output_dir", type=click.Path(file_okay=False), required=True)
@click.option("--family", type=click.Choice(DATASET_FAMILIES), default=None)
@click.option("--variants", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--model", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--toy-denoiser", is_flag=True)
@click.option("--toy-mean", type=float, default=0.0)
@click.option("--toy-var", type=float, default=0.25)
@click.option("--T", "train_steps", type=int, default=None)
@click.option("--steps", type=int, default=None)
@click.option("--jump", type=int, default=None)
@click.option("--resamples", type=int, default=None)
@click.option("--workers", type=int, default=None)
@click.pass_context
def augment_cmd(ctx, input_dir, output_dir, family, variants, seed, model, toy_denoiser,
                toy_mean, toy_var, train_steps, steps, jump, resamples, workers):
    """Emit the original plus N augmented variants per input record."""
    family = _cfg(ctx, "family", family, "combination")
    variants = _cfg(ctx, "variants", variants, 5, int)
    seed = _cfg(ctx, "seed", seed, 0, int)
    train_steps = _cfg(ctx, "train_steps", train_steps, 4000, int)
    config = RePaintConfig(
        jump_length=_cfg(ctx, "jump", jump, 10, int),
        n_resamples=_cfg(ctx, "resamples", resamples, 10, int),
        inference_steps=_cfg(ctx, "steps", steps, 250, int),
    )
    workers = _cfg(ctx, "workers", workers, 1, int)
    sched = cosine_schedule(train_steps)
    if family == "no-repaint":
        denoiser = None
    else:
        denoiser = _build_denoiser(sched, model, toy_denoiser, toy_mean, toy_var)
    _echo_config(
        output_dir,
        {
            "command": "augment",
            "family": family,
            "variants": variants,
            "seed": seed,
            "train_steps": train_steps,
            "steps": config.inference_steps,
            "jump": config.jump_length,
            "resamples": config.n_resamples,
            "model": model or ("toy-denoiser" if denoiser is not None else "none"),
            "workers": workers,
        },
    )
    try:
        summary = augment_dataset(
            input_dir,
            output_dir,
            denoiser,
            sched,
            config,
            master_seed=seed,
            family=family,
            n_variants=variants,
            workers=workers,
        )
    except Exception as exc:
        raise click.ClickException(f"augmentation failed: {exc}") from exc
    wall = summary.pop("wall_time_s")
    (Path(output_dir) / "summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    click.echo(
        f"inputs={summary['inputs']} outputs={summary['outputs']} "
        f"failed_variants={summary['failed_variants']} "
        f"skipped_records={summary['skipped_records']} wall_time_s={wall:.2f}"
    )


@main.command("metrics")
@click.option("--pred", "pred_dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--ref", "ref_dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--label", type=click.Choice(sorted(LABEL_BY_NAME)), default="lv")
@click.option("--report", type=click.Path(dir_okay=False), required=True)
@click.pass_context
def metrics_cmd(ctx, pred_dir, ref_dir, label, report):
    """Per-frame Dice / Hausdorff against reference masks, plus subset table."""
    label_value = LABEL_BY_NAME[label]
    rows = []
    for stem in frame_io.list_frame_stems(ref_dir):
        ref = frame_io.load_frame(ref_dir, stem)
        row = FrameMetrics(
            frame_id=stem,
            depth_mm=ref.geometry.depth_mm,
            angle_deg=ref.geometry.angle_deg,
        )
        pred_path = Path(pred_dir) / f"{stem}_msk.png"
        if ref.mask is not None and pred_path.exists():
            pred_mask = frame_io.load_mask_png(pred_path)
            try:
                row.dice = dice(pred_mask, ref.mask, label=label_value)
                row.hausdorff_mm = hausdorff_mm(
                    pred_mask, ref.mask, label=label_value, mm_per_px=ref.geometry.mm_per_px
                )
            except ValueError:
                row.dice = None
                row.hausdorff_mm = None
        rows.append(row)
    if not rows:
        raise click.ClickException(f"no frame records found in {ref_dir}")
    write_metrics_csv(report, rows)
    click.echo(f"wrote {report} ({len(rows)} rows)")
    for name, stats in subset_report(rows).items():
        if stats["dice_mean"] is None:
            click.echo(f"{name}: n={stats['n']}")
        else:
            sd = stats["dice_sd"] or 0.0
            hsd = stats["hd_sd_mm"] or 0.0
            click.echo(
                f"{name}: n={stats['n']} dice={stats['dice_mean']:.3f}+-{sd:.3f} "
                f"hd_mm={stats['hd_mean_mm']:.2f}+-{hsd:.2f}"
            )


@main.command("ef")
@click.option("--exams", "exams_dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.pass_context
def ef_cmd(ctx, exams_dir, out):
    """Automatic EF per exam directory; see README for the exam layout."""
    from .exam_io import load_exams

    exams = load_exams(exams_dir)
    if not exams:
        raise click.ClickException(f"no exams found in {exams_dir}")
    results = [exam_ef(exam) for exam in exams]
    with open(out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["patient_id", "auto_ef", "manual_ef", "out_of_range", "n_pairs", "failed"])
        for r in results:
            writer.writerow(
                [
                    r.patient_id,
                    "" if r.ef is None else f"{r.ef:.6f}",
                    "" if r.manual_ef is None else f"{r.manual_ef:.6f}",
                    "" if r.out_of_range is None else str(int(r.out_of_range)),
                    r.n_pairs,
                    str(int(r.failed)),
                ]
            )
    n_done = sum(1 for r in results if not r.failed)
    click.echo(
        f"wrote {out}: {n_done}/{len(results)} exams computed "
        f"(feasibility {100.0 * n_done / len(results):.1f}%)"
    )


@main.command("bland-altman")
@click.option("--in", "in_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--split", type=str, default=None, help="CSV column to split on (e.g. out_of_range)")
@click.option("--table", type=click.Path(dir_okay=False), default=None,
              help="write a plot-ready (mean, diff, split) table")
@click.pass_context
def bland_altman_cmd(ctx, in_path, split, table):
    """Agreement statistics between auto and manual EF columns."""
    groups = {}
    rows = []
    with open(in_path, newline="", encoding="utf-8") as fh:
        for rec in csv.DictReader(fh):
            if not rec.get("auto_ef") or not rec.get("manual_ef"):
                continue
            auto = float(rec["auto_ef"])
            manual = float(rec["manual_ef"])
            key = rec.get(split, "") if split else "all"
            groups.setdefault(key or "all", []).append((auto, manual))
            rows.append(
                {
                    "patient_id": rec.get("patient_id", ""),
                    "mean": (auto + manual) / 2.0,
                    "diff": auto - manual,
                    "split": key or "all",
                }
            )
    if not rows:
        raise click.ClickException("no rows with both auto_ef and manual_ef")
    for key in sorted(groups):
        pairs = groups[key]
        if len(pairs) < 2:
            click.echo(f"split={key}: n={len(pairs)} (too few for limits of agreement)")
            continue
        stats = bland_altman(pairs)
        click.echo(
            f"split={key}: n={stats.n} bias={stats.bias:+.4f} "
            f"loa=[{stats.loa_low:+.4f}, {stats.loa_high:+.4f}] sd={stats.sd:.4f}"
        )
    if table:
        with open(table, "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=["patient_id", "mean", "diff", "split"])
            writer.writeheader()
            writer.writerows(rows)
        click.echo(f"wrote {table}")


@main.group()
def survey():
    """Blinded realism survey."""


@survey.command("plan")
@click.option("--real", "real_dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--synth", "synth_dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.option("--seed", type=int, default=0)
def survey_plan_cmd(real_dir, synth_dir, out, seed):
    """Build a seeded 45 + 5 survey plan from two PNG pools."""
    real = {p.stem: str(p.resolve()) for p in sorted(Path(real_dir).glob("*.png"))}
    synth = {p.stem: str(p.resolve()) for p in sorted(Path(synth_dir).glob("*.png"))}
    try:
        plan = build_plan(real, synth, np.random.default_rng(seed), seed=seed)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc
    plan.save(out)
    click.echo(f"wrote {out}")


@survey.command("serve")
@click.option("--plan", "plan_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--store", "store_dir", type=click.Path(file_okay=False), default="survey_store")
@click.option("--ui", "ui_dir", type=click.Path(file_okay=False), default=None)
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8000)
def survey_serve_cmd(plan_path, store_dir, ui_dir, host, port):
    """Serve the survey API (and the UI bundle when --ui is given)."""
    import shutil

    import uvicorn

    from .server import create_app

    plan = SurveyPlan.load(plan_path)
    store_dir = Path(store_dir)
    store_dir.mkdir(parents=True, exist_ok=True)
    # keep a copy of the plan next to the responses so `survey report`
    # needs only the store directory
    if Path(plan_path).resolve() != (store_dir / "plan.json").resolve():
        shutil.copyfile(plan_path, store_dir / "plan.json")
    store = ResponseStore(store_dir / "responses.ndjson")
    app = create_app(plan, store, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")


@survey.command("report")
@click.option("--store", "store_dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--json", "as_json", is_flag=True, help="emit the full summary as JSON")
def survey_report_cmd(store_dir, as_json):
    """Summarize recorded responses."""
    store_dir = Path(store_dir)
    plan_path = store_dir / "plan.json"
    if not plan_path.exists():
        raise click.ClickException(f"{plan_path} not found (serve copies it there)")
    plan = SurveyPlan.load(plan_path)
    store = ResponseStore(store_dir / "responses.ndjson")
    summary = summarize(store, plan)
    if as_json:
        click.echo(json.dumps(summary_to_dict(summary), indent=2, sort_keys=True))
        return
    click.echo(f"participants={summary.n_participants}")

    def line(name, stats):
        if stats.n_trials == 0:
            return f"{name}: no responses"
        return (
            f"{name}: {stats.n_correct}/{stats.n_trials} accuracy={stats.accuracy:.4f} "
            f"p_two_sided={stats.p_two_sided:.4g} p_one_sided={stats.p_one_sided:.4g}"
        )

    click.echo(line("overall", summary.overall))
    for group, stats in summary.by_group.items():
        click.echo(line(group, stats))
    click.echo(line("non_cardiologists", summary.non_cardiologists))


if __name__ == "__main__":
    sys.exit(main())
