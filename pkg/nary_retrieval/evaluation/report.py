"""Report files of an experiment: key=value summary, recall CSV and a separate timing file.

The summary and the CSV depend only on the configuration and seed; wall-clock timings go to
their own file so that repeated runs produce byte-identical reports.
"""
import logging
import os

import pandas as pd

from nary_retrieval.evaluation.recall import AUC_DEFINITION, RECALL_DEFINITION, RecallCurve

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "{:.10g}"


def format_report(result) -> str:
    """key=value lines describing an ExperimentResult."""
    cfg = result.config
    layout = cfg.layout
    lines = [
        ("method", cfg.method),
        ("strategy", cfg.strategy.value),
        ("bit_budget", cfg.bit_budget),
        ("bits_per_dim", cfg.bits_per_dim),
        ("code_length", layout.m),
        ("arity", layout.n),
        ("seed", cfg.seed),
        ("data", cfg.data or f"synthetic(dim={cfg.dim}, latent_dim={cfg.latent_dim or cfg.dim}, "
                             f"clusters={cfg.clusters}, spread={cfg.spread})"),
        ("n_train", cfg.n_train),
        ("n_base", cfg.n_base),
        ("n_query", cfg.n_query),
        ("normalize", str(cfg.normalize).lower()),
        ("lambda", cfg.lam),
        ("k", cfg.k),
        ("r_grid", ",".join(str(r) for r in result.curve.r_grid)),
        ("recall_definition", RECALL_DEFINITION),
        ("auc_definition", AUC_DEFINITION),
        ("auc", result.auc),
        ("train_reconstruction_error", result.train_error),
        ("training_iterations", len(result.convergence)),
    ]
    lines += [(f"recall@{r}", v) for r, v in zip(result.curve.r_grid, result.curve.recall)]
    return "".join(f"{key}={FLOAT_FORMAT.format(value) if isinstance(value, float) else value}\n"
                   for key, value in lines)


def curve_frame(curve: RecallCurve) -> pd.DataFrame:
    return pd.DataFrame({"R": list(curve.r_grid), "recall": list(curve.recall)})


def write_artifacts(result, output_dir: str) -> dict[str, str]:
    """Writes <label>.report.txt, <label>.recall.csv and <label>.timing.txt into output_dir."""
    label = result.config.label
    paths = {
        "report": os.path.join(output_dir, f"{label}.report.txt"),
        "curve": os.path.join(output_dir, f"{label}.recall.csv"),
        "timing": os.path.join(output_dir, f"{label}.timing.txt"),
    }
    with open(paths["report"], "w", encoding="utf-8", newline="\n") as f:
        f.write(format_report(result))
    curve_frame(result.curve).to_csv(paths["curve"], index=False, float_format="%.10g", lineterminator="\n")
    with open(paths["timing"], "w", encoding="utf-8", newline="\n") as f:
        f.writelines(f"{stage}_seconds={seconds:.6f}\n" for stage, seconds in result.timings.items())
    logger.info(f"Wrote report for {label} to {output_dir}")
    return paths
