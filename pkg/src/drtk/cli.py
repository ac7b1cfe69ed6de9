"""Command-line entry points: attack, profile, eval, sweep, train-desk-model.

A single YAML config document drives every command; a handful of flags
(--epsilon, --steps, --alpha, --layer, --seed, --out) override config keys.
Relative paths in the config resolve against the config file's directory.
Exit codes: 0 success, 2 config error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import copy
import json
import sys
from pathlib import Path

import numpy as np
import yaml

from .attacks import AttackConfig, ATTACKS, LABEL_FREE, run_attack
from .data import make_shapes_dataset  # noqa: F401  (re-export for scripts)
from .errors import ConfigError, DrtkError
from .evaluation import EvalReport, relative_eval, sweep_layers, sweep_steps
from .images import ImageBatch, load_batch, quantize, save_batch
from .manifest import RunManifest, prepare_run_dir
from .models import checkpoint_dir, load_checkpoint, save_checkpoint, train_desk_cnn
from .targets import local_adapter, mock_api_adapter

DEFAULTS = {
    "seed": 0,
    "limit": None,
    "attack": {"name": "dr"},
    "source_model": {"arch": "small4conv", "seed": 1},
    "paths": {"models_root": "models", "dataset": None, "out": "run"},
    "targets": [],
    "eval": {"clean_dir": None, "adv_dir": None, "score_threshold": 0.05},
    "sweep": {
        "mode": "steps",
        "attacks": ["dr", "pgd", "mifgsm", "dim", "tidim"],
        "step_values": [20, 100, 500],
        "layers": None,
        "limit": 16,
    },
    "train": {"dataset": None, "arch": "small4conv", "seed": 1, "epochs": 20},
}


def _deep_merge(base: dict, override: dict) -> dict:
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def load_config(config_path: str, overrides: dict | None = None) -> dict:
    """Read a YAML config (or a prior run manifest) and apply flag overrides."""
    path = Path(config_path)
    if not path.is_file():
        raise ConfigError("config", f"file not found: {path}")
    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError("config", f"unparseable YAML in {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config", f"{path} must hold a mapping at top level")
    if "config" in raw and "command" in raw:  # a manifest: reuse its snapshot
        raw = raw["config"]
    cfg = _deep_merge(DEFAULTS, raw)

    overrides = overrides or {}
    if overrides.get("epsilon") is not None:
        cfg["attack"]["epsilon"] = overrides["epsilon"]
    if overrides.get("steps") is not None:
        cfg["attack"]["steps"] = overrides["steps"]
    if overrides.get("alpha") is not None:
        cfg["attack"]["alpha"] = overrides["alpha"]
    if overrides.get("layer") is not None:
        cfg["attack"]["target_layer"] = overrides["layer"]
    if overrides.get("seed") is not None:
        cfg["seed"] = overrides["seed"]
    if overrides.get("out") is not None:
        cfg["paths"]["out"] = overrides["out"]

    cfg["_base_dir"] = str(path.parent.resolve())
    return cfg


def _resolve(cfg: dict, value: str | None) -> Path | None:
    if value is None:
        return None
    p = Path(value)
    return p if p.is_absolute() else Path(cfg["_base_dir"]) / p


def _attack_config(cfg: dict) -> AttackConfig:
    section = {k: v for k, v in cfg["attack"].items() if k != "name"}
    section.setdefault("rng_seed", cfg["seed"])
    try:
        return AttackConfig.from_dict(section)
    except TypeError as exc:
        raise ConfigError("attack", str(exc)) from exc


def _load_source_model(cfg: dict):
    src = cfg["source_model"]
    root = _resolve(cfg, cfg["paths"]["models_root"])
    return load_checkpoint(checkpoint_dir(root, src["arch"], src["seed"]))


def _resolve_layer(model, layer: str) -> str:
    if layer == "middle":
        return model.layer_keys[len(model.layer_keys) // 2]
    return layer


def _dataset_batch(cfg: dict, model, need_labels: bool):
    dataset = _resolve(cfg, cfg["paths"]["dataset"])
    if dataset is None:
        raise ConfigError("paths.dataset", "required")
    batch = load_batch(dataset, limit=cfg["limit"])
    labels = None
    if need_labels:
        index = {name: i for i, name in enumerate(model.class_names)}
        labels = []
        for image_id in batch.ids:
            cls = image_id.split("/")[0]
            if cls not in index:
                raise ConfigError(
                    "paths.dataset",
                    f"image {image_id!r} is not under a class directory of the "
                    f"source model (classes: {model.class_names})",
                )
            labels.append(index[cls])
        labels = np.asarray(labels, dtype=np.int64)
    return batch, labels


def _build_targets(cfg: dict):
    adapters = []
    for entry in cfg["targets"]:
        kind = entry.get("kind")
        if kind == "local":
            adapters.append(local_adapter(_resolve(cfg, entry["spec"])))
        elif kind == "mock":
            adapters.append(mock_api_adapter(_resolve(cfg, entry["fixture"])))
        else:
            raise ConfigError("targets.kind", f"must be 'local' or 'mock', got {kind!r}")
    if not adapters:
        raise ConfigError("targets", "at least one target is required")
    return adapters


def _assert_saved_budget(clean: ImageBatch, adv: ImageBatch, epsilon: float):
    # quantize first, then assert: what lands on disk provably satisfies the budget
    c = quantize(clean.data).astype(np.int16)
    a = quantize(adv.data).astype(np.int16)
    worst = int(np.abs(a - c).max()) if a.size else 0
    if worst > epsilon:
        raise DrtkError(f"saved images violate the budget: max|adv-clean| = {worst}")


def cmd_attack(config_path: str, overrides: dict | None = None) -> Path:
    cfg = load_config(config_path, overrides)
    attack_name = cfg["attack"]["name"]
    if attack_name not in ATTACKS:
        raise ConfigError("attack.name", f"must be one of {sorted(ATTACKS)}")
    atk_cfg = _attack_config(cfg)
    model = _load_source_model(cfg)
    if attack_name == "dr":
        if atk_cfg.target_layer is None:
            raise ConfigError("attack.target_layer", "required for attack 'dr'")
        atk_cfg = atk_cfg.replace(target_layer=_resolve_layer(model, atk_cfg.target_layer))

    batch, labels = _dataset_batch(cfg, model, need_labels=attack_name not in LABEL_FREE)
    result = run_attack(attack_name, batch, model, atk_cfg, y=labels)

    run_dir = prepare_run_dir(_resolve(cfg, cfg["paths"]["out"]))
    _assert_saved_budget(batch, result.adversarial, atk_cfg.epsilon)
    save_batch(result.adversarial, run_dir / "adv")
    result.write_trace(run_dir / "trace.jsonl")
    summary = {
        "attack": attack_name,
        "source_model": model.name,
        "images": len(batch),
        "final_linf": {
            image_id: float((result.adversarial.image(i) - batch.image(i)).abs().max())
            for i, image_id in enumerate(batch.ids)
        },
    }
    if result.converged_std is not None:
        summary["converged_std"] = {
            image_id: float(result.converged_std[i]) for i, image_id in enumerate(batch.ids)
        }
        summary["best_iteration"] = {
            image_id: int(result.best_iteration[i]) for i, image_id in enumerate(batch.ids)
        }
    (run_dir / "summary.json").write_text(json.dumps(summary, indent=2))
    RunManifest(
        command="attack",
        config={k: v for k, v in cfg.items() if k != "_base_dir"},
        seed=cfg["seed"],
        artifacts={
            "adv_dir": str(run_dir / "adv"),
            "trace": str(run_dir / "trace.jsonl"),
            "summary": str(run_dir / "summary.json"),
        },
    ).save(run_dir)
    print(f"attack {attack_name}: {len(batch)} images -> {run_dir}")
    return run_dir


def cmd_train(config_path: str, overrides: dict | None = None) -> Path:
    cfg = load_config(config_path, overrides)
    train = cfg["train"]
    dataset = _resolve(cfg, train["dataset"])
    if dataset is None:
        raise ConfigError("train.dataset", "required")
    surrogate = train_desk_cnn(
        dataset, arch=train["arch"], seed=train["seed"], epochs=train["epochs"]
    )
    root = _resolve(cfg, cfg["paths"]["models_root"])
    out = save_checkpoint(surrogate, root)
    print(f"trained {surrogate.name}: val_accuracy={surrogate.val_accuracy:.3f} -> {out}")
    return out


def cmd_profile(config_path: str, overrides: dict | None = None) -> Path:
    from .models import profile_layers

    cfg = load_config(config_path, overrides)
    atk_cfg = _attack_config(cfg)
    model = _load_source_model(cfg)
    probe, _ = _dataset_batch(cfg, model, need_labels=False)
    profile = profile_layers(model, probe, atk_cfg)
    run_dir = prepare_run_dir(_resolve(cfg, cfg["paths"]["out"]))
    profile.to_csv(run_dir / "layer_profile.csv")
    recommendation = {
        "recommended_layer": profile.recommended_layer,
        "deltas": {row.layer_key: row.delta for row in profile.rows},
    }
    (run_dir / "recommendation.json").write_text(json.dumps(recommendation, indent=2))
    RunManifest(
        command="profile",
        config={k: v for k, v in cfg.items() if k != "_base_dir"},
        seed=cfg["seed"],
        artifacts={
            "profile": str(run_dir / "layer_profile.csv"),
            "recommendation": str(run_dir / "recommendation.json"),
        },
    ).save(run_dir)
    print(f"profile: recommended layer = {profile.recommended_layer} -> {run_dir}")
    return run_dir


def _eval_batches(cfg: dict):
    eval_cfg = cfg["eval"]
    clean_dir = _resolve(cfg, eval_cfg["clean_dir"])
    adv_dir = _resolve(cfg, eval_cfg["adv_dir"])
    if clean_dir is None:
        raise ConfigError("eval.clean_dir", "required")
    if adv_dir is None:
        raise ConfigError("eval.adv_dir", "required")
    attack_name = "unknown"
    if (adv_dir / "manifest.json").is_file() and (adv_dir / "adv").is_dir():
        attack_name = RunManifest.load(adv_dir / "manifest.json").config["attack"]["name"]
        adv_dir = adv_dir / "adv"
    clean = load_batch(clean_dir, limit=cfg["limit"])
    adv = load_batch(adv_dir, limit=cfg["limit"])
    return clean, adv, attack_name


def cmd_eval(config_path: str, overrides: dict | None = None) -> Path:
    cfg = load_config(config_path, overrides)
    clean, adv, attack_name = _eval_batches(cfg)
    adapters = _build_targets(cfg)
    source = f"{cfg['source_model']['arch']}-s{cfg['source_model']['seed']}"
    report = EvalReport()
    for adapter in adapters:
        report.rows.append(
            relative_eval(
                adapter, clean, adv,
                source_model=source,
                attack=attack_name,
                score_threshold=cfg["eval"]["score_threshold"],
            )
        )
    run_dir = prepare_run_dir(_resolve(cfg, cfg["paths"]["out"]))
    report.to_csv(run_dir / "report.csv")
    report.to_json(run_dir / "report.json")
    RunManifest(
        command="eval",
        config={k: v for k, v in cfg.items() if k != "_base_dir"},
        seed=cfg["seed"],
        artifacts={"report_csv": str(run_dir / "report.csv"),
                   "report_json": str(run_dir / "report.json")},
    ).save(run_dir)
    for row in report.rows:
        print(f"eval {row.target}: {row.metric_name}={row.adv_value:.2f} "
              f"(excluded {row.excluded})")
    return run_dir


def cmd_sweep(config_path: str, overrides: dict | None = None) -> Path:
    cfg = load_config(config_path, overrides)
    sweep_cfg = cfg["sweep"]
    atk_cfg = _attack_config(cfg)
    model = _load_source_model(cfg)
    if atk_cfg.target_layer is not None:
        atk_cfg = atk_cfg.replace(target_layer=_resolve_layer(model, atk_cfg.target_layer))
    adapters = _build_targets(cfg)
    target = adapters[0]

    cfg_limited = dict(cfg)
    cfg_limited["limit"] = sweep_cfg["limit"]
    mode = sweep_cfg["mode"]
    if mode == "steps":
        need_labels = any(a not in LABEL_FREE for a in sweep_cfg["attacks"])
        probe, labels = _dataset_batch(cfg_limited, model, need_labels=need_labels)
        if atk_cfg.target_layer is None and "dr" in sweep_cfg["attacks"]:
            raise ConfigError("attack.target_layer", "required for attack 'dr'")
        report = sweep_steps(
            sweep_cfg["attacks"], probe, model, atk_cfg, target,
            labels=labels, n_values=sweep_cfg["step_values"],
        )
        curve_name = "curve_steps.csv"
    elif mode == "layers":
        probe, _ = _dataset_batch(cfg_limited, model, need_labels=False)
        layers = sweep_cfg["layers"] or list(model.layer_keys)
        report = sweep_layers(model, layers, probe, atk_cfg, target)
        curve_name = "curve_layers.csv"
    else:
        raise ConfigError("sweep.mode", f"must be 'steps' or 'layers', got {mode!r}")

    run_dir = prepare_run_dir(_resolve(cfg, cfg["paths"]["out"]))
    report.curves_to_csv(run_dir / curve_name)
    report.to_json(run_dir / "report.json")
    RunManifest(
        command="sweep",
        config={k: v for k, v in cfg.items() if k != "_base_dir"},
        seed=cfg["seed"],
        artifacts={"curves": str(run_dir / curve_name),
                   "report_json": str(run_dir / "report.json")},
    ).save(run_dir)
    print(f"sweep {mode}: {len(report.curves)} curve points -> {run_dir}")
    return run_dir


COMMANDS = {
    "attack": cmd_attack,
    "profile": cmd_profile,
    "eval": cmd_eval,
    "sweep": cmd_sweep,
    "train-desk-model": cmd_train,
}


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="drtk",
        description="Dispersion-reduction attack toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("config", help="YAML config file (or a prior run manifest)")
        p.add_argument("--epsilon", type=float, default=None)
        p.add_argument("--steps", type=int, default=None)
        p.add_argument("--alpha", type=float, default=None)
        p.add_argument("--layer", type=str, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", type=str, default=None)
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    overrides = {
        "epsilon": args.epsilon,
        "steps": args.steps,
        "alpha": args.alpha,
        "layer": args.layer,
        "seed": args.seed,
        "out": args.out,
    }
    try:
        COMMANDS[args.command](args.config, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DrtkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
