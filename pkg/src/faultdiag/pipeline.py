"""Experiment orchestration: configs, run directories, and pipeline stages.

A run directory collects everything one experiment produced: the resolved
config and its manifest hash, the dataset, trained model, detections,
cluster assignments, metric reports, and figures.  Every stage is a pure
function of (config, seed), so identical inputs rewrite identical bytes.
"""

from __future__ import annotations

import csv
import hashlib
import json
import shutil
from pathlib import Path

import numpy as np

from . import __version__, clustering, datagen, detector, metrics, projection, report, vae

CONFIG_VERSION = 1

VALID_VARIANTS = tuple(sorted(vae.VARIANTS)) + ("sl-ff",)


class ConfigError(ValueError):
    """Bad experiment config: unknown keys, wrong types, missing version."""


class StageError(RuntimeError):
    """A stage was invoked before its prerequisites; names the missing stage."""

    def __init__(self, missing_stage, message):
        super().__init__(message)
        self.missing_stage = missing_stage


_SCHEMA = {
    "version": None,
    "name": "run",
    "seed": 0,
    "variant": "kil-adavae",
    "out": None,
    "dataset": {
        "source": "generate",
        "seed": 0,
        "path": None,
        "column_map": None,
        "spec": None,
    },
    "model": {"latent_dim": 8, "hidden": 20, "alpha": None, "beta": None, "gamma": None},
    "train": {"lr": 0.005, "batch": 512, "epochs": 800},
    "one_class": {"lr": 0.001, "batch": 16, "epochs": 300},
    "detector": {"percentile": 99.9, "margin": 1.5},
    "optics": {"min_samples": 100, "max_eps": None, "extraction": "xi", "xi": 0.05,
               "eps": None, "min_cluster_size": None},
    "metrics": {"clustering": True, "amig": True, "lsg": False, "mmi": False,
                "mmi_max_rows": None},
    "tsne": {"perplexity": 200.0, "iterations": 1000, "learning_rate": 200.0,
             "seed": 0},
}


def resolve_config(payload):
    """Validate a raw config dict against the schema and fill defaults."""
    if not isinstance(payload, dict):
        raise ConfigError("config must be a JSON object")
    if payload.get("version") != CONFIG_VERSION:
        raise ConfigError(
            f"config version must be {CONFIG_VERSION}, got {payload.get('version')!r}")

    def merge(schema, raw, path):
        unknown = set(raw) - set(schema)
        if unknown:
            raise ConfigError(f"unknown config keys at {path or 'top level'}: {sorted(unknown)}")
        out = {}
        for key, default in schema.items():
            if isinstance(default, dict):
                sub = raw.get(key, {})
                if not isinstance(sub, dict):
                    raise ConfigError(f"config section {path}{key} must be an object")
                out[key] = merge(default, sub, f"{path}{key}.")
            else:
                out[key] = raw.get(key, default)
        return out

    cfg = merge(_SCHEMA, payload, "")
    if cfg["variant"] not in VALID_VARIANTS:
        raise ConfigError(
            f"unknown variant {cfg['variant']!r}; valid variants: {', '.join(VALID_VARIANTS)}")
    if cfg["dataset"]["source"] not in ("generate", "csv"):
        raise ConfigError("dataset.source must be 'generate' or 'csv'")
    if cfg["dataset"]["source"] == "csv" and not cfg["dataset"]["path"]:
        raise ConfigError("dataset.source 'csv' needs dataset.path")
    if cfg["dataset"]["spec"] is not None:
        datagen.GenerationSpec.from_dict(cfg["dataset"]["spec"])  # validates
    return cfg


def load_config(path):
    try:
        with open(path) as fh:
            payload = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    return resolve_config(payload)


def manifest_hash(cfg, seed):
    canonical = json.dumps({"config": cfg, "seed": seed, "code_version": __version__},
                           sort_keys=True)
    return hashlib.sha256(canonical.encode()).hexdigest()


def _write_manifest(cfg, seed, run_dir):
    run_dir.mkdir(parents=True, exist_ok=True)
    with open(run_dir / "config.json", "w") as fh:
        json.dump(cfg, fh, indent=2, sort_keys=True)
    with open(run_dir / "manifest.json", "w") as fh:
        json.dump({"hash": manifest_hash(cfg, seed), "seed": seed,
                   "code_version": __version__}, fh, indent=2, sort_keys=True)


def _log(run_dir, message, fresh=False):
    mode = "w" if fresh else "a"
    with open(run_dir / "log.txt", mode) as fh:
        fh.write(message + "\n")


# ---------------------------------------------------------------------------
# dataset plumbing

def _generation_spec(cfg):
    raw = cfg["dataset"]["spec"]
    return datagen.default_generation_spec() if raw is None else datagen.GenerationSpec.from_dict(raw)


def stage_generate(cfg, run_dir):
    """Write dataset.csv under the run directory; returns the Dataset."""
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    if cfg["dataset"]["source"] != "generate":
        raise ConfigError("generate was asked for, but dataset.source is 'csv'")
    ds = datagen.generate(_generation_spec(cfg), seed=cfg["dataset"]["seed"])
    ds.save_csv(run_dir / "dataset.csv")
    counts = ds.counts()
    _log(run_dir, f"generate: {ds.X.shape[0]} rows "
                  f"(S_T {counts['S_T']}, S_V {counts['S_V']}, "
                  f"D_U {counts['D_U']}, D_T {counts['D_T']})")
    return ds


def _dataset_for(cfg, run_dir):
    src = cfg["dataset"]
    if src["source"] == "csv":
        path = Path(src["path"])
        if not path.exists():
            raise StageError("generate", f"dataset file {path} does not exist")
        return datagen.load_csv(path, src["column_map"])
    csv_path = Path(run_dir) / "dataset.csv"
    if csv_path.exists():
        return datagen.load_csv(csv_path)
    return stage_generate(cfg, run_dir)


# ---------------------------------------------------------------------------
# model plumbing

def _vae_train_config(cfg, seed):
    t = cfg["train"]
    return vae.TrainConfig(lr=t["lr"], batch=t["batch"], epochs=t["epochs"], seed=seed)


def _one_class_config(cfg, seed):
    t = cfg["one_class"]
    return detector.DetectorTrainConfig(lr=t["lr"], batch=t["batch"],
                                        epochs=t["epochs"], seed=seed)


def stage_train(cfg, run_dir, seed):
    """Train the representation model (or the raw-input baseline) and save it."""
    run_dir = Path(run_dir)
    ds = _dataset_for(cfg, run_dir)
    _write_manifest(cfg, seed, run_dir)
    variant = cfg["variant"]
    m = cfg["model"]
    if variant == "sl-ff":
        scaler = datagen.Scaler.fit(ds.rows("S_T"))
        det, history = detector.train_supervised_baseline(
            scaler.apply(ds.rows("S_T")), scaler.apply(ds.rows("S_V")),
            _one_class_config(cfg, seed),
            percentile=cfg["detector"]["percentile"], margin=cfg["detector"]["margin"])
        payload = {"format_version": 1, "variant": "sl-ff",
                   "detector": det.to_dict(), "scaler": scaler.to_dict()}
        with open(run_dir / "model.json", "w") as fh:
            json.dump(payload, fh)
        hist = {"total": history, "recon": history, "kl": [], "kl_labeled": []}
        final = history[-1] if history else float("nan")
        _log(run_dir, f"train: sl-ff baseline, final loss {final:.6g}")
    else:
        model, hist = vae.train_vae(
            ds, variant, _vae_train_config(cfg, seed),
            latent_dim=m["latent_dim"], hidden=m["hidden"],
            alpha=m["alpha"], beta=m["beta"], gamma=m["gamma"])
        model.save(run_dir / "model.json")
        final = hist["total"][-1] if hist["total"] else float("nan")
        _log(run_dir, f"train: {variant}, final loss {final:.6g}")

    with open(run_dir / "loss_history.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "recon", "kl", "kl_labeled", "total"])
        for e in range(len(hist["total"])):
            writer.writerow([
                e + 1,
                repr(float(hist["recon"][e])),
                repr(float(hist["kl"][e])) if hist["kl"] else "",
                repr(float(hist["kl_labeled"][e])) if hist["kl_labeled"] else "",
                repr(float(hist["total"][e])),
            ])
    report.fig_loss_history(hist, run_dir / "loss.svg")
    return run_dir / "model.json"


def _load_model(run_dir):
    path = Path(run_dir) / "model.json"
    if not path.exists():
        raise StageError("train", f"no model at {path}; run the train stage first")
    with open(path) as fh:
        payload = json.load(fh)
    if payload.get("variant") == "sl-ff":
        return {"kind": "sl-ff",
                "detector": detector.OneClassDetector.from_dict(payload["detector"]),
                "scaler": datagen.Scaler.from_dict(payload["scaler"])}
    return {"kind": "vae", "model": vae.VaeModel.from_dict(payload)}


def _representation(info, x):
    """Latent codes used downstream (mu for VAEs, the 8-unit layer for sl-ff)."""
    if info["kind"] == "sl-ff":
        xn = info["scaler"].apply(x)
        return detector.hidden_representation(info["detector"].net, xn, layer_index=1)
    model = info["model"]
    mu, _ = vae.encode(model, model.scaler.apply(x))
    return mu


def stage_detect(cfg, run_dir, seed):
    """Train/calibrate the one-class detector and score the evaluation rows."""
    run_dir = Path(run_dir)
    ds = _dataset_for(cfg, run_dir)
    info = _load_model(run_dir)
    dcfg = cfg["detector"]
    if info["kind"] == "sl-ff":
        det = info["detector"]
        scores = det.score(info["scaler"].apply(ds.X))
    else:
        model = info["model"]
        z_train = _representation(info, ds.rows("S_T"))
        z_val = _representation(info, ds.rows("S_V"))
        det, _ = detector.fit_detector(
            z_train, z_val, _one_class_config(cfg, seed),
            percentile=dcfg["percentile"], margin=dcfg["margin"])
        det.save(run_dir / "detector.json")
        scores = det.score(_representation(info, ds.X))
    pred = detector.detect(scores)

    eval_mask = ds.mask("D_U", "D_T")
    with open(run_dir / "detections.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row", "t", "split", "state", "true_h", "score", "pred_h"])
        for i in np.flatnonzero(eval_mask):
            writer.writerow([
                int(i), repr(float(ds.t[i])), ds.split[i], int(ds.state[i]),
                int(ds.state[i] == 0), repr(float(scores[i])), int(pred[i]),
            ])
    truth = (ds.state[eval_mask] == 0).astype(int)
    sc = metrics.detection_scores(truth, pred[eval_mask])
    _log(run_dir, f"detect: accuracy {sc.accuracy:.2f}%, "
                  f"detection rate {sc.detection_rate:.2f}%, "
                  f"false alarms {sc.false_alarm:.2f}%")
    return sc


def _optics_params(cfg):
    o = cfg["optics"]
    return clustering.OpticsParams(
        min_samples=o["min_samples"],
        max_eps=np.inf if o["max_eps"] is None else float(o["max_eps"]),
        extraction=o["extraction"],
        xi=o["xi"],
        eps=o["eps"],
        min_cluster_size=o["min_cluster_size"],
    )


def stage_segment(cfg, run_dir, seed):
    """Cluster the evaluation-row latents with OPTICS; write profile and labels."""
    run_dir = Path(run_dir)
    ds = _dataset_for(cfg, run_dir)
    info = _load_model(run_dir)
    eval_rows = np.flatnonzero(ds.mask("D_U", "D_T"))
    z = _representation(info, ds.X[eval_rows])
    result = clustering.optics(z, _optics_params(cfg))

    with open(run_dir / "clusters.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["position", "row", "reachability", "core_distance",
                         "label", "state"])
        for pos, local in enumerate(result.ordering):
            gi = eval_rows[local]
            writer.writerow([
                pos, int(gi),
                repr(float(result.reachability[local])),
                repr(float(result.core_distance[local])),
                int(result.labels[local]), int(ds.state[gi]),
            ])
    report.fig_reachability(result, run_dir / "reachability.svg")
    _log(run_dir, f"segment: R = {result.n_clusters} clusters, "
                  f"{int(np.sum(result.labels == -1))} noise points")
    return result


def _read_detections(run_dir):
    path = Path(run_dir) / "detections.csv"
    if not path.exists():
        raise StageError("detect", f"no detections at {path}; run the detect stage first")
    true_h, pred_h = [], []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            true_h.append(int(rec["true_h"]))
            pred_h.append(int(rec["pred_h"]))
    return np.array(true_h), np.array(pred_h)


def _read_clusters(run_dir):
    path = Path(run_dir) / "clusters.csv"
    if not path.exists():
        return None
    rows, labels, states = [], [], []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            rows.append(int(rec["row"]))
            labels.append(int(rec["label"]))
            states.append(int(rec["state"]))
    order = np.argsort(rows)
    return (np.array(rows)[order], np.array(labels)[order], np.array(states)[order])


def stage_metrics(cfg, run_dir, seed):
    """Consolidate detection, clustering, and representation metrics."""
    run_dir = Path(run_dir)
    ds = _dataset_for(cfg, run_dir)
    toggles = cfg["metrics"]
    sections = []
    csv_rows = []

    true_h, pred_h = _read_detections(run_dir)
    sc = metrics.detection_scores(true_h, pred_h)
    sections.append(("Detection", report.markdown_table(
        ["Model", "Acc (%)", "Detection rate (%)", "False alarms (%)"],
        [[cfg["variant"], sc.accuracy, sc.detection_rate, sc.false_alarm]])))
    csv_rows += [("detection", "accuracy", sc.accuracy),
                 ("detection", "detection_rate", sc.detection_rate),
                 ("detection", "false_alarm", sc.false_alarm)]

    clusters = _read_clusters(run_dir) if toggles["clustering"] else None
    if clusters is not None:
        _, labels, states = clusters
        scored = metrics.noise_as_cluster(labels)
        ami = metrics.adjusted_mutual_info(scored, states)
        h, c = metrics.homogeneity_completeness(scored, states)
        r = int(labels.max()) + 1 if labels.size and labels.max() >= 0 else 0
        cluster_rows = [["latent", r, ami, h, c]]
        csv_rows += [("clustering", "r", r), ("clustering", "ami", ami),
                     ("clustering", "homogeneity", h), ("clustering", "completeness", c)]

        if toggles["amig"]:
            info = _load_model(run_dir)
            eval_mask = ds.mask("D_U", "D_T")
            xn = _normalized_inputs(info, ds.X[eval_mask])
            res_x = clustering.optics(xn, _optics_params(cfg))
            ami_x = metrics.adjusted_mutual_info(
                metrics.noise_as_cluster(res_x.labels), ds.state[eval_mask])
            hx, cx = metrics.homogeneity_completeness(
                metrics.noise_as_cluster(res_x.labels), ds.state[eval_mask])
            cluster_rows.append(["input", res_x.n_clusters, ami_x, hx, cx])
            csv_rows += [("clustering", "r_input", res_x.n_clusters),
                         ("clustering", "ami_input", ami_x),
                         ("clustering", "amig", ami - ami_x)]
        sections.append(("Fault segmentation", report.markdown_table(
            ["Space", "R", "AMI", "h", "c"], cluster_rows)))

    rep_rows = []
    if toggles["lsg"] or toggles["mmi"]:
        info = _load_model(run_dir)
        eval_mask = ds.mask("D_U", "D_T")
        xn = _normalized_inputs(info, ds.X[eval_mask])
        z = _representation(info, ds.X[eval_mask])
        states = ds.state[eval_mask]
        if toggles["lsg"]:
            res = metrics.lsg(xn, z, states)
            rep_rows.append(["LSG (pp)", res.gain])
            csv_rows += [("representation", "lsg", res.gain),
                         ("representation", "probe_acc_latent", res.accuracy_latent),
                         ("representation", "probe_acc_input", res.accuracy_input)]
        if toggles["mmi"]:
            cap = toggles["mmi_max_rows"]
            mx = metrics.mmi(xn, z, max_rows=cap)
            rep_rows.append(["MMI mean I(x, mu)", mx.mean])
            csv_rows += [("representation", "mmi_x_mu_mean", mx.mean),
                         ("representation", "mmi_x_mu_total", mx.total)]
            if info["kind"] == "vae":
                rng = np.random.default_rng(seed)
                zs, xbar = vae.sample_reconstruction(info["model"], xn, rng)
                mz = metrics.mmi(zs, xbar, max_rows=cap)
                rep_rows.append(["MMI mean I(z, xbar)", mz.mean])
                csv_rows += [("representation", "mmi_z_xbar_mean", mz.mean),
                             ("representation", "mmi_z_xbar_total", mz.total)]
    if rep_rows:
        sections.append(("Representation", report.markdown_table(
            ["Metric", "Value"], rep_rows)))

    report.write_markdown(run_dir / "metrics.md",
                          f"Metrics: {cfg['name']} ({cfg['variant']}, seed {seed})",
                          sections)
    report.write_csv_table(run_dir / "metrics.csv",
                           ["section", "metric", "value"], csv_rows)
    _log(run_dir, f"metrics: wrote {len(csv_rows)} values")
    return dict(((s, k), v) for s, k, v in csv_rows)


def _normalized_inputs(info, x):
    scaler = info["scaler"] if info["kind"] == "sl-ff" else info["model"].scaler
    return scaler.apply(x)


def stage_project(cfg, run_dir, seed):
    """t-SNE of the evaluation-row latents; colored by cluster when available."""
    run_dir = Path(run_dir)
    ds = _dataset_for(cfg, run_dir)
    info = _load_model(run_dir)
    eval_rows = np.flatnonzero(ds.mask("D_U", "D_T"))
    z = _representation(info, ds.X[eval_rows])
    t = cfg["tsne"]
    params = projection.TsneParams(perplexity=t["perplexity"],
                                   iterations=t["iterations"],
                                   learning_rate=t["learning_rate"],
                                   seed=t["seed"])
    result = projection.tsne(z, params)
    clusters = _read_clusters(run_dir)
    labels = clusters[1] if clusters is not None else None
    states = ds.state[eval_rows]
    projection.save_embedding_csv(result.embedding, run_dir / "tsne.csv",
                                  labels=labels, states=states)
    color = labels if labels is not None else states
    report.fig_embedding(result.embedding, run_dir / "tsne.svg", color,
                         legend_title="cluster" if labels is not None else "state")
    _log(run_dir, f"project: final KL {result.kl_history[-1]:.4f} "
                  f"(initial {result.kl_history[0]:.4f})")
    return result


STAGES = {
    "train": stage_train,
    "detect": stage_detect,
    "segment": stage_segment,
    "metrics": stage_metrics,
    "project": stage_project,
}


def seed_dir(out_dir, seeds, seed):
    out_dir = Path(out_dir)
    return out_dir if len(seeds) == 1 else out_dir / f"seed-{seed}"


def run_stage(cfg, stage, out_dir, seeds=None):
    """Run one stage for each seed; aggregates metrics across seeds."""
    if stage not in STAGES:
        raise ConfigError(f"unknown stage {stage!r}")
    seeds = list(seeds) if seeds else [cfg["seed"]]
    results = {}
    for seed in seeds:
        rd = seed_dir(out_dir, seeds, seed)
        rd.mkdir(parents=True, exist_ok=True)
        _write_manifest(cfg, seed, rd)
        results[seed] = STAGES[stage](cfg, rd, seed)
    if stage == "metrics" and len(seeds) > 1:
        _aggregate_metrics(cfg, out_dir, seeds, results)
    return results


def _aggregate_metrics(cfg, out_dir, seeds, per_seed):
    out_dir = Path(out_dir)
    keys = list(per_seed[seeds[0]].keys())
    rows = []
    for section, metric in keys:
        values = [per_seed[s][(section, metric)] for s in seeds]
        rows.append([section, metric, report.format_mean_std(values)])
    report.write_csv_table(out_dir / "metrics.csv",
                           ["section", "metric", "mean_std"], rows)
    body = report.markdown_table(["Section", "Metric", "Mean +- std"], rows)
    report.write_markdown(out_dir / "metrics.md",
                          f"Metrics: {cfg['name']} ({cfg['variant']}, "
                          f"seeds {', '.join(str(s) for s in seeds)})",
                          [("Aggregate over seeds", body)])


# ---------------------------------------------------------------------------
# sweeps and consolidated report

def run_sweep(cfg, param, values, out_dir, variant=None):
    """Loss-weight sweep; emits the comparison table across values.

    beta sweeps report accuracy, the MI maps, and the training losses;
    gamma sweeps report accuracy, cluster count, and AMI.
    """
    if param not in ("beta", "gamma"):
        raise ConfigError(f"sweep parameter must be beta or gamma, got {param!r}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cfg = dict(cfg)
    if variant:
        if variant not in VALID_VARIANTS or variant == "sl-ff":
            raise ConfigError(f"sweep needs a VAE variant, got {variant!r}")
        cfg["variant"] = variant

    ds = _dataset_for(cfg, out_dir)
    ds.save_csv(out_dir / "dataset.csv")
    seed = cfg["seed"]
    rows = []
    for value in values:
        sub_cfg = json.loads(json.dumps(cfg))
        sub_cfg["model"][param] = value
        sub = out_dir / f"{param}-{value:g}"
        sub.mkdir(parents=True, exist_ok=True)
        if not (sub / "dataset.csv").exists():
            shutil.copyfile(out_dir / "dataset.csv", sub / "dataset.csv")
        stage_train(sub_cfg, sub, seed)
        sc = stage_detect(sub_cfg, sub, seed)
        if param == "beta":
            info = _load_model(sub)
            model = info["model"]
            eval_mask = ds.mask("D_U", "D_T")
            xn = model.scaler.apply(ds.X[eval_mask])
            mu, _ = vae.encode(model, xn)
            cap = cfg["metrics"]["mmi_max_rows"]
            mi_x_mu = metrics.mmi(xn, mu, max_rows=cap).mean
            rng = np.random.default_rng(seed)
            zs, xbar = vae.sample_reconstruction(model, xn, rng)
            mi_z_xbar = metrics.mmi(zs, xbar, max_rows=cap).mean
            hist = _final_losses(sub)
            rows.append([value, sc.accuracy, mi_x_mu, mi_z_xbar,
                         hist["recon"], hist["total"]])
        else:
            res = stage_segment(sub_cfg, sub, seed)
            scored = metrics.noise_as_cluster(res.labels)
            eval_mask = ds.mask("D_U", "D_T")
            ami = metrics.adjusted_mutual_info(scored, ds.state[eval_mask])
            rows.append([value, sc.accuracy, res.n_clusters, ami])

    if param == "beta":
        headers = ["beta", "Acc (%)", "I(x, mu)", "I(z, xbar)", "l2 loss", "total loss"]
    else:
        headers = ["gamma", "Acc (%)", "R", "AMI"]
    report.write_csv_table(out_dir / "sweep.csv", headers, rows)
    report.write_markdown(out_dir / "sweep.md",
                          f"Sweep over {param} ({cfg['variant']}, seed {seed})",
                          [(f"{param} sweep", report.markdown_table(headers, rows))])
    return rows


def _final_losses(run_dir):
    with open(Path(run_dir) / "loss_history.csv", newline="") as fh:
        last = None
        for last in csv.DictReader(fh):
            pass
    if last is None:
        return {"recon": float("nan"), "total": float("nan")}
    return {"recon": float(last["recon"]), "total": float(last["total"])}


def run_report(run_dir):
    """Consolidate a run directory into report.md linking tables and figures."""
    run_dir = Path(run_dir)
    sections = []
    metrics_md = run_dir / "metrics.md"
    if not metrics_md.exists():
        raise StageError("metrics", f"no metrics.md under {run_dir}; run the metrics stage first")
    body = metrics_md.read_text()
    body = body.split("\n", 1)[1] if body.startswith("#") else body
    sections.append(("Metrics", body.strip() + "\n"))

    figures = [p.name for p in sorted(run_dir.glob("*.svg"))]
    if figures:
        listing = "\n".join(f"- ![{name}]({name})" for name in figures)
        sections.append(("Figures", listing + "\n"))
    artifacts = [p.name for p in sorted(run_dir.iterdir()) if p.is_file()]
    sections.append(("Artifacts", "\n".join(f"- `{name}`" for name in artifacts) + "\n"))
    title = run_dir.name
    cfg_path = run_dir / "config.json"
    if cfg_path.exists():
        with open(cfg_path) as fh:
            title = json.load(fh).get("name", title)
    report.write_markdown(run_dir / "report.md", f"Run report: {title}", sections)
    return run_dir / "report.md"
