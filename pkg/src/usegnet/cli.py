"""Command-line entry point.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 numerical or state failure.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, NoReturn, Optional, Sequence

import pydantic

from . import __version__
from .data.cohort import write_phantom_cohort
from .data.labels import labels_from_volume, remap_labels
from .data.nifti import load_nifti, save_nifti
from .data.raw import RawElement, load_raw, save_raw
from .evaluation.overlay import export_overlay
from .evaluation.report import evaluate_predictions, format_table, write_report
from .evaluation.segment import Fusion, segment_volume
from .exceptions import ConfigError, USegNetError, ValidationError
from .models.network import ModelVariant
from .models.volumes import LabelConvention, Volume
from .network.builders import DEFAULT_WIDTH, build_model
from .network.checkpoint import load_weights
from .network.graph import layer_breakdown, param_count
from .pipeline import Experiment

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

# Flag dest -> RunConfig key for the train command
TRAIN_FLAGS = {
    "model": "model",
    "width": "width",
    "epochs": "max_epochs",
    "learning_rate": "learning_rate",
    "momentum": "momentum",
    "l2": "l2",
    "batch_size": "batch_size",
    "seed": "seed",
    "manifest": "manifest",
    "phantom_count": "phantom_count",
    "phantom_dims": "phantom_dims",
    "phantom_seed": "phantom_seed",
    "split_seed": "split_seed",
    "fusion": "fusion",
    "max_bg_fraction": "max_bg_fraction",
    "finetune_stages": "finetune_stages",
    "stage_epochs": "stage_epochs",
    "out": "output_dir",
}


class UsageError(Exception):
    """Raised by the parser instead of exiting with argparse's status 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> NoReturn:
        raise UsageError(f"{self.prog}: {message}")


def _triple(text: str, minimum: int) -> List[int]:
    try:
        values = [int(p) for p in text.replace("x", ",").split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected three integers, got {text!r}")
    if len(values) != 3 or min(values) < minimum:
        raise argparse.ArgumentTypeError(
            f"expected three integers >= {minimum}, got {text!r}"
        )
    return values


def _dims(text: str) -> List[int]:
    return _triple(text, 1)


def _counts(text: str) -> List[int]:
    return _triple(text, 0)


def build_parser() -> argparse.ArgumentParser:
    """Parser with the phantom, train, segment, evaluate and params commands."""
    parser = _Parser(
        prog="usegnet",
        description="Brain tissue segmentation with SegNet/U-Net hybrids",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Generate an 18-volume phantom cohort
  usegnet phantom --count 18 --out data/phantoms

  # Train U-SegNet on it (6 train / 3 val / 9 test)
  usegnet train --manifest data/phantoms/cohort.csv --out runs/usegnet

  # Parameter count of SegNet
  usegnet params --model segnet
        """,
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument(
        "--log-level",
        default="INFO",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging verbosity (default: INFO)",
    )
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    models = [m.value for m in ModelVariant]
    fusions = [f.value for f in Fusion]

    p = sub.add_parser("phantom", help="Generate a synthetic phantom cohort")
    p.add_argument("--count", type=int, default=18, help="Number of volumes")
    p.add_argument("--dims", type=_dims, default=[64, 64, 16], help="X,Y,Z")
    p.add_argument("--seed", type=int, default=0, help="Seed of the first phantom")
    p.add_argument("--noise-std", type=float, default=0.1)
    p.add_argument("--bias-amplitude", type=float, default=0.1)
    p.add_argument("--out", required=True, help="Output directory")

    t = sub.add_parser("train", help="Train, then evaluate on the test split")
    t.add_argument("--config", help="key=value configuration file")
    t.add_argument("--model", choices=models)
    t.add_argument("--width", type=int)
    t.add_argument("--epochs", type=int, help="Maximum epochs")
    t.add_argument("--lr", dest="learning_rate", type=float)
    t.add_argument("--momentum", type=float)
    t.add_argument("--l2", type=float)
    t.add_argument("--batch-size", type=int)
    t.add_argument("--seed", type=int)
    t.add_argument("--manifest", help="Cohort CSV (phantoms generated if omitted)")
    t.add_argument("--phantom-count", type=int)
    t.add_argument("--phantom-dims", type=_dims)
    t.add_argument("--phantom-seed", type=int)
    t.add_argument(
        "--split", type=_counts, help="Train,val,test volume counts (e.g. 6,3,9)"
    )
    t.add_argument("--split-seed", type=int)
    t.add_argument("--fusion", choices=fusions)
    t.add_argument("--max-bg-fraction", type=float)
    t.add_argument("--finetune-stages", type=int)
    t.add_argument("--stage-epochs", type=int)
    t.add_argument("--out", help="Output directory")
    t.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Set any configuration key (repeatable)",
    )

    s = sub.add_parser("segment", help="Segment a volume with a trained checkpoint")
    s.add_argument("--checkpoint", required=True)
    s.add_argument("--volume", required=True, help=".nii file or raw f64 payload")
    s.add_argument("--dims", type=_dims, help="X,Y,Z for raw volumes")
    s.add_argument("--model", choices=models, default=ModelVariant.USEGNET.value)
    s.add_argument("--width", type=int, default=DEFAULT_WIDTH)
    s.add_argument("--fusion", choices=fusions, default=Fusion.MAJORITY.value)
    s.add_argument("--out", required=True, help="Predicted labels (.nii or raw u8)")
    s.add_argument(
        "--overlay",
        type=int,
        action="append",
        default=[],
        metavar="Z",
        help="Export a PPM overlay of slice Z (repeatable)",
    )

    e = sub.add_parser("evaluate", help="Score a predicted label volume")
    e.add_argument("--pred", required=True)
    e.add_argument("--truth", required=True)
    e.add_argument("--dims", type=_dims, help="X,Y,Z for raw volumes")
    e.add_argument(
        "--truth-convention",
        choices=[c.value for c in LabelConvention],
        default=LabelConvention.MODEL.value,
    )
    e.add_argument("--out", help="Directory for report.csv and report.txt")

    q = sub.add_parser("params", help="Print parameter counts")
    q.add_argument("--model", choices=models, default=ModelVariant.USEGNET.value)
    q.add_argument("--width", type=int, default=DEFAULT_WIDTH)
    return parser


def _load_volume(
    path: str, dims: Optional[Sequence[int]], element: RawElement
) -> Volume:
    if path.endswith(".nii"):
        volume, _ = load_nifti(path)
        return volume
    if dims is None:
        raise ValidationError(f"--dims is required for raw volume {path}")
    return load_raw(path, dims, element)


def cmd_phantom(args: argparse.Namespace) -> int:
    """Write paired phantom volumes and their cohort manifest."""
    if args.count < 0:
        raise ValidationError(f"--count must be >= 0, got {args.count}")
    manifest = write_phantom_cohort(
        args.out,
        args.count,
        tuple(args.dims),
        args.seed,
        args.noise_std,
        args.bias_amplitude,
    )
    print(f"Wrote {args.count} phantom pairs; manifest {manifest}")
    return EXIT_OK


def train_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    """RunConfig overrides from explicit flags and --set pairs."""
    overrides: Dict[str, Any] = {}
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key.strip()] = value.strip()
    for dest, key in TRAIN_FLAGS.items():
        value = getattr(args, dest, None)
        if value is not None:
            overrides[key] = value
    if args.split is not None:
        overrides["split_train"], overrides["split_val"], overrides["split_test"] = (
            args.split
        )
    return overrides


def cmd_train(args: argparse.Namespace) -> int:
    """Run the training protocol and print the test summary."""
    experiment = Experiment.from_overrides(train_overrides(args), args.config)
    outcome = experiment.train()
    print(f"Best checkpoint: {outcome.fit.best_checkpoint}")
    if outcome.report is not None:
        print(format_table(outcome.report, experiment.config.model.value), end="")
    return EXIT_OK


def cmd_segment(args: argparse.Namespace) -> int:
    """Segment one volume and write labels plus optional overlays."""
    volume = _load_volume(args.volume, args.dims, RawElement.F64)
    graph = build_model(args.model, args.width)
    load_weights(graph, args.checkpoint)
    labels = segment_volume(graph, volume, args.fusion)

    out = Path(args.out)
    if out.suffix == ".nii":
        save_nifti(labels.labels, out, datatype=2)
    else:
        save_raw(labels.labels, out, RawElement.U8)
    for z in args.overlay:
        export_overlay(labels, z, out.with_name(f"{out.stem}_z{z:03d}.ppm"))
    print(f"Wrote labels {labels.dims} to {out}")
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    """Compare a prediction with ground truth and print the table."""
    pred = labels_from_volume(
        _load_volume(args.pred, args.dims, RawElement.U8), LabelConvention.MODEL
    )
    truth = remap_labels(
        labels_from_volume(
            _load_volume(args.truth, args.dims, RawElement.U8), args.truth_convention
        ),
        LabelConvention.MODEL,
    )
    report = evaluate_predictions([pred], [truth], [Path(args.truth).stem])
    if args.out:
        write_report(report, args.out)
    print(format_table(report), end="")
    return EXIT_OK


def cmd_params(args: argparse.Namespace) -> int:
    """Print the learnable parameter total and per-layer rows."""
    graph = build_model(args.model, args.width)
    for layer_id, kind, shape, count in layer_breakdown(graph):
        print(f"{layer_id:<14} {kind:<7} {shape:<20} {count:>10}")
    print(f"total {param_count(graph)}")
    return EXIT_OK


COMMANDS = {
    "phantom": cmd_phantom,
    "train": cmd_train,
    "segment": cmd_segment,
    "evaluate": cmd_evaluate,
    "params": cmd_params,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point.

    Returns:
        Exit code
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_USAGE

    logging.basicConfig(level=args.log_level, format=LOG_FORMAT, stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except USegNetError as e:
        print(f"error: {e.message}", file=sys.stderr)
        return e.exit_code
    except pydantic.ValidationError as e:
        print(f"error: invalid configuration: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
