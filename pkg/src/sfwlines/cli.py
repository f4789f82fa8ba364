"""Command-line front end: synthesize, recover, evaluate, run experiments, render.

Exit codes: 0 ok, 1 usage, 2 I/O, 3 dimension mismatch, 4 solver stall,
5 parse error.

Run settings come from three layers, later ones winning: the ``--preset``
experiment, the JSON ``--config`` file (same schema as ``meta.json``), and
the ``--seed``/``--lambda`` flags.
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, replace

import numpy as np

from sfwlines.forward import DimensionError, Observation, residual
from sfwlines.kernels import KernelModel, model_from_dict, model_to_dict
from sfwlines.measures import DiscreteMeasure
from sfwlines.metrics import ErrorReport, evaluate
from sfwlines.presets import PRESET_IDS, preset
from sfwlines.radon import radon_transform
from sfwlines.sfw import STOP_STALLED, SFWConfig, SFWReport, sfw_run
from sfwlines.synth import GroundTruth, synthesize_observation

log = logging.getLogger("sfwlines")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_DIMENSION = 3
EXIT_STALL = 4
EXIT_PARSE = 5

U64_MAX = 2 ** 64 - 1


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------- settings


@dataclass(frozen=True)
class RunSettings:
    """Everything needed to synthesize and recover one observation."""

    model: KernelModel
    lam: float
    noise_sigma: float = 0.0
    seed: int = 0
    k_max: int = 20
    cert_tol: float = 1e-2
    radon_P: int = 128
    noise_kind: str = "complex"
    lines: DiscreteMeasure | None = None
    preset: int | None = None

    def sfw_config(self) -> SFWConfig:
        return SFWConfig(lam=self.lam, domain=self.model.default_domain(),
                         k_max=self.k_max, cert_tol=self.cert_tol, radon_P=self.radon_P)

    def ground_truth(self) -> GroundTruth:
        if self.lines is None:
            raise CliError(EXIT_USAGE, "no ground-truth lines in preset or config")
        return GroundTruth(self.lines, self.model, self.noise_sigma, self.seed, self.noise_kind)

    def to_meta(self) -> dict:
        d = {
            "preset": self.preset,
            "model": model_to_dict(self.model),
            "seed": self.seed,
            "noise_sigma": self.noise_sigma,
            "noise_kind": self.noise_kind,
            "lambda": self.lam,
            "k_max": self.k_max,
            "cert_tol": self.cert_tol,
            "radon_P": self.radon_P,
        }
        if self.lines is not None:
            d["lines"] = self.lines.to_dict()["lines"]
        return d


def _settings_from_preset(id_: int, printed: bool = False) -> RunSettings:
    p = preset(id_, printed)
    return RunSettings(model=p.model, lam=p.lam, noise_sigma=p.noise_sigma,
                       k_max=p.k_max, radon_P=p.radon_P, lines=p.lines, preset=p.id)


def _apply_config(base: RunSettings | None, d: dict) -> RunSettings:
    try:
        changes = {}
        if "model" in d:
            changes["model"] = model_from_dict(d["model"])
        for key, field in (("lambda", "lam"), ("noise_sigma", "noise_sigma"),
                           ("cert_tol", "cert_tol")):
            if key in d:
                changes[field] = float(d[key])
        for key in ("seed", "k_max", "radon_P"):
            if key in d:
                changes[key] = int(d[key])
        if "noise_kind" in d:
            changes["noise_kind"] = str(d["noise_kind"])
        if "lines" in d:
            changes["lines"] = DiscreteMeasure.from_dict({"lines": d["lines"]})
        if "preset" in d:
            changes["preset"] = None if d["preset"] is None else int(d["preset"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(EXIT_PARSE, f"bad config: {exc}") from exc
    if base is None:
        if "model" not in changes or "lam" not in changes:
            raise CliError(EXIT_PARSE, "config without a preset needs 'model' and 'lambda'")
        model = changes.pop("model")
        lam = changes.pop("lam")
        changes.setdefault("radon_P", model.default_radon_size())
        return RunSettings(model=model, lam=lam, **changes)
    return replace(base, **changes)


def resolve_settings(args, required: bool = True) -> RunSettings | None:
    base = None
    if getattr(args, "preset", None) is not None:
        base = _settings_from_preset(args.preset, getattr(args, "printed", False))
    if getattr(args, "config", None):
        base = _apply_config(base, read_json(args.config))
    if base is None:
        if required:
            raise CliError(EXIT_USAGE, "give --preset or --config")
        return None
    if getattr(args, "seed", None) is not None:
        base = replace(base, seed=args.seed)
    if getattr(args, "lam", None) is not None:
        base = replace(base, lam=args.lam)
    return base


# ---------------------------------------------------------------- formats


def format_observation(obs: Observation) -> str:
    """N lines of N comma-separated values with 17 significant digits."""
    img = obs.image()
    return "".join(",".join(format(float(v), ".17g") for v in row) + "\n" for row in img)


def parse_observation(text: str) -> Observation:
    try:
        rows = [[float(v) for v in line.split(",")] for line in text.splitlines() if line.strip()]
    except ValueError as exc:
        raise CliError(EXIT_PARSE, f"bad observation value: {exc}") from exc
    n = len(rows)
    if n == 0 or any(len(r) != n for r in rows):
        raise CliError(EXIT_PARSE, "observation must be a non-empty square table")
    return Observation.from_image(np.array(rows))


def dumps_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def format_grid_csv(row_axis: np.ndarray, col_axis: np.ndarray, values: np.ndarray,
                    corner: str) -> str:
    """Grid with its axes: the first row holds column coordinates, the first column row coordinates."""
    buf = io.StringIO()
    buf.write(corner + "," + ",".join(format(float(v), ".17g") for v in col_axis) + "\n")
    for a, row in zip(row_axis, values):
        buf.write(format(float(a), ".17g") + ","
                  + ",".join(format(float(v), ".17g") for v in row) + "\n")
    return buf.getvalue()


def overlay_ppm(obs: Observation, model: KernelModel | None, est: DiscreteMeasure) -> bytes:
    """Grayscale image (min to 0, max to 255) with estimated lines in pure red."""
    img = obs.image()
    N = obs.side
    lo, hi = float(img.min()), float(img.max())
    if hi > lo:
        gray = np.rint(255.0 * (img - lo) / (hi - lo)).astype(np.uint8)
    else:
        gray = np.zeros((N, N), dtype=np.uint8)
    rgb = np.repeat(gray[:, :, None], 3, axis=2)
    if len(est):
        if model is None:
            raise CliError(EXIT_USAGE, "drawing lines needs the kernel model")
        for eta, theta in zip(est.etas, est.thetas):
            rows, cols, _ = model.line_coords(float(theta), np.array([eta]))
            r = np.rint(rows[0]).astype(int)
            c = np.rint(cols[0]).astype(int)
            ok = (r >= 0) & (r < N) & (c >= 0) & (c < N)
            rgb[r[ok], c[ok]] = (255, 0, 0)
    return f"P6\n{N} {N}\n255\n".encode("ascii") + rgb.tobytes()


# ---------------------------------------------------------------- file I/O


def read_text(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read {path}: {exc}") from exc


def read_json(path: str) -> dict:
    text = read_text(path)
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_PARSE, f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(d, dict):
        raise CliError(EXIT_PARSE, f"{path} must hold a JSON object")
    return d


def read_measure(path: str) -> tuple[DiscreteMeasure, KernelModel | None]:
    d = read_json(path)
    try:
        m = DiscreteMeasure.from_dict(d)
        model = model_from_dict(d["model"]) if "model" in d else None
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(EXIT_PARSE, f"{path} is not a line list: {exc}") from exc
    return m, model


def write_files(out_dir: str, files: dict[str, bytes | str]) -> None:
    """Write all files or none: each goes to a temporary name first."""
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot create {out_dir}: {exc}") from exc
    done: list[str] = []
    try:
        for name, data in files.items():
            path = os.path.join(out_dir, name)
            tmp = path + ".part"
            mode = "wb" if isinstance(data, bytes) else "w"
            kw = {} if isinstance(data, bytes) else {"encoding": "utf-8", "newline": ""}
            with open(tmp, mode, **kw) as fh:
                fh.write(data)
            os.replace(tmp, path)
            done.append(path)
    except OSError as exc:
        for path in done + [os.path.join(out_dir, n) + ".part" for n in files]:
            if os.path.exists(path):
                os.remove(path)
        raise CliError(EXIT_IO, f"cannot write to {out_dir}: {exc}") from exc


# ---------------------------------------------------------------- pipelines


def synth_files(s: RunSettings) -> tuple[Observation, dict[str, str]]:
    gt = s.ground_truth()
    obs = synthesize_observation(gt)
    return obs, {
        "observation.csv": format_observation(obs),
        "truth.json": dumps_json(gt.to_dict()),
        "meta.json": dumps_json(s.to_meta()),
    }


def certificate_grid(model: KernelModel, est: DiscreteMeasure, obs: Observation,
                     lam: float, P: int):
    """Certificate of ``est`` on a ``P x P`` (theta, eta) grid over the default box."""
    d = model.default_domain()
    thetas = np.linspace(d.theta_min, d.theta_max, P)
    etas = np.linspace(d.eta_min, d.eta_max, P)
    r = residual(model, est, obs).pixels
    vals = np.empty((P, P))
    for p, th in enumerate(thetas):
        vals[p] = model.images(etas, np.full(P, th)) @ r / lam
    return thetas, etas, vals


def recover_files(s: RunSettings, obs: Observation, dump_radon: bool = False,
                  dump_certificate: bool = False, overlay: bool = False
                  ) -> tuple[SFWReport, dict[str, str | bytes]]:
    if obs.side != s.model.N:
        raise CliError(EXIT_DIMENSION,
                       f"observation is {obs.side}x{obs.side}, model expects {s.model.N}")
    cfg = s.sfw_config()
    rep = sfw_run(s.model, obs, cfg)
    est = dict(rep.measure.to_dict(), model=model_to_dict(s.model))
    files: dict[str, str | bytes] = {
        "estimate.json": dumps_json(est),
        "report.json": dumps_json(rep.to_dict()),
    }
    if dump_radon:
        g = radon_transform(obs, cfg.domain, cfg.radon_P, s.model)
        files["radon.csv"] = format_grid_csv(g.theta_samples, g.eta_samples, g.values,
                                             "theta\\eta")
    if dump_certificate:
        th, et, vals = certificate_grid(s.model, rep.measure, obs, s.lam, cfg.radon_P)
        files["certificate.csv"] = format_grid_csv(th, et, vals, "theta\\eta")
    if overlay:
        files["overlay.ppm"] = overlay_ppm(obs, s.model, rep.measure)
    return rep, files


def _fmt(v: float) -> str:
    return "nan" if math.isnan(v) else format(v, ".6e")


def experiment_summary(id_: int, name: str, note: str, rows: list[dict]) -> tuple[str, str]:
    """summary.csv text and a table in the layout of the original error table."""
    keys = ("delta_theta_bar", "delta_eta_bar", "delta_alpha_bar")
    ok = [r for r in rows if r["status"] == "ok"]
    med = {k: float(np.median([r[k] for r in ok])) if ok else math.nan for k in keys}
    buf = io.StringIO()
    if note:
        buf.write(f"# {note}\n")
    buf.write("seed,status,stop_reason,est_count,true_count," + ",".join(keys) + "\n")
    for r in rows:
        vals = ",".join(format(r[k], ".17g") if r["status"] == "ok" else "" for k in keys)
        buf.write(f"{r['seed']},{r['status']},{r.get('stop_reason', '')},"
                  f"{r.get('est_count', '')},{r.get('true_count', '')},{vals}\n")
    buf.write("median,,,,," + ",".join(format(med[k], ".17g") for k in keys) + "\n")

    head = f"Errors on estimated parameters: Exp. {id_} ({name}), median over {len(ok)} of {len(rows)} seeds\n"
    table = [head]
    if note:
        table.append(f"Note: {note}\n")
    table.append(f"{'Error':<8}| Exp. {id_}\n")
    for label, k in (("dtheta", keys[0]), ("deta", keys[1]), ("dalpha", keys[2])):
        table.append(f"{label:<8}| {_fmt(med[k])}\n")
    return buf.getvalue(), "".join(table)


# ---------------------------------------------------------------- commands


def cmd_synth(args) -> int:
    s = resolve_settings(args)
    _, files = synth_files(s)
    write_files(args.out, files)
    return EXIT_OK


def cmd_recover(args) -> int:
    s = resolve_settings(args)
    obs = parse_observation(read_text(args.observation))
    rep, files = recover_files(s, obs, args.dump_radon, args.dump_certificate, args.overlay)
    write_files(args.out, files)
    if rep.stop_reason == STOP_STALLED:
        print("solver stalled; partial report written", file=sys.stderr)
        return EXIT_STALL
    return EXIT_OK


def cmd_eval(args) -> int:
    est, est_model = read_measure(args.estimate)
    truth_doc = read_json(args.truth)
    try:
        truth = DiscreteMeasure.from_dict({"lines": truth_doc["lines"]})
        truth_model = model_from_dict(truth_doc["model"]) if "model" in truth_doc else None
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(EXIT_PARSE, f"{args.truth} is not a ground truth: {exc}") from exc
    model = truth_model or est_model
    scale = model.eta_scale if model is not None else 1.0
    sys.stdout.write(dumps_json(evaluate(est, truth, scale).to_dict()))
    return EXIT_OK


def cmd_experiment(args) -> int:
    if args.id not in PRESET_IDS:
        raise CliError(EXIT_USAGE, f"experiment id must be one of {PRESET_IDS}")
    if args.seeds < 1:
        raise CliError(EXIT_USAGE, "--seeds must be >= 1")
    p = preset(args.id, args.printed)
    base = _settings_from_preset(args.id, args.printed)
    if args.lam is not None:
        base = replace(base, lam=args.lam)
    try:
        os.makedirs(args.out, exist_ok=True)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot create {args.out}: {exc}") from exc

    first = 0 if args.seed is None else args.seed
    rows = []
    for seed in range(first, first + args.seeds):
        s = replace(base, seed=seed)
        row = {"seed": seed}
        try:
            obs, files = synth_files(s)
            rep, more = recover_files(s, obs)
            files.update(more)
            err = evaluate(rep.measure, p.lines, s.model.eta_scale)
            files["errors.json"] = dumps_json(err.to_dict())
            write_files(os.path.join(args.out, f"seed_{seed}"), files)
            row.update(err.to_dict(), stop_reason=rep.stop_reason,
                       status="ok" if not err.empty else "no_match")
            for k in ("delta_theta_bar", "delta_eta_bar", "delta_alpha_bar"):
                row[k] = math.nan if row[k] is None else row[k]
        except (CliError, ValueError, FloatingPointError, np.linalg.LinAlgError) as exc:
            log.error("seed %d failed: %s", seed, exc)
            row["status"] = "failed"
        rows.append(row)
        log.info("seed %d: %s", seed, row["status"])

    csv_text, table = experiment_summary(p.id, p.name, p.note, rows)
    write_files(args.out, {"summary.csv": csv_text, "summary.txt": table})
    sys.stdout.write(table)
    return EXIT_OK if any(r["status"] == "ok" for r in rows) else EXIT_STALL


def cmd_render(args) -> int:
    obs = parse_observation(read_text(args.observation))
    est, model = read_measure(args.estimate)
    s = resolve_settings(args, required=False)
    if s is not None:
        model = s.model
    if model is not None and len(est) and model.N != obs.side:
        raise CliError(EXIT_DIMENSION, "estimate model does not match the observation size")
    write_files(os.path.dirname(os.path.abspath(args.output)),
                {os.path.basename(args.output): overlay_ppm(obs, model, est)})
    return EXIT_OK


# ---------------------------------------------------------------- parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(EXIT_USAGE, f"{self.prog}: {message}")


def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v <= U64_MAX:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sfwlines", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log solver progress")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def settings_flags(p, seed=True):
        p.add_argument("--preset", type=int, choices=PRESET_IDS)
        p.add_argument("--printed", action="store_true",
                       help="experiment 5 with its printed (out-of-band) parameters")
        p.add_argument("--config", help="JSON file with the meta.json schema")
        if seed:
            p.add_argument("--seed", type=_seed)

    p = sub.add_parser("synth", help="synthesize an observation and its ground truth")
    settings_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("recover", help="run Sliding Frank-Wolfe on an observation")
    p.add_argument("observation")
    settings_flags(p)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--out", required=True)
    p.add_argument("--dump-radon", action="store_true")
    p.add_argument("--dump-certificate", action="store_true")
    p.add_argument("--overlay", action="store_true", help="also write overlay.ppm")
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("eval", help="compare an estimate against ground truth")
    p.add_argument("estimate")
    p.add_argument("truth")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("experiment", help="synth, recover and eval over several seeds")
    p.add_argument("id", type=int)
    p.add_argument("--seeds", type=int, default=5, help="number of seeds")
    p.add_argument("--seed", type=_seed, help="first seed (default 0)")
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--printed", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("render", help="draw estimated lines over an observation")
    p.add_argument("observation")
    p.add_argument("estimate")
    p.add_argument("output")
    settings_flags(p, seed=False)
    p.set_defaults(func=cmd_render)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except CliError as exc:
        print(exc, file=sys.stderr)
        return exc.code
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except DimensionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIMENSION


if __name__ == "__main__":
    sys.exit(main())
