"""
Command-line interface: one subcommand per experiment stage plus the full pipeline.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
"""
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple
import sys

import click
from dotenv import load_dotenv
from rich.console import Console
from rich.table import Table

from .augment import AugmentMode, ConditionalGenerator, augment_corpus, train_generator
from .config import ExperimentConfig, ModelConfig, TrainingConfig
from .content_model import ItemMask, load_corpus, save_corpus
from .error_handler import ExitCode, MixplanError, describe_error
from .generation import generate_corpus, load_generations, save_generations
from .logging_config import configure_logging
from .mixed_lm.checkpoint import load_checkpoint, save_checkpoint
from .mixed_lm.decoding import DecodeMode
from .pipeline import (
    STAGES,
    ExperimentPipeline,
    analyze_generations,
    evaluate_generations,
    system_inputs,
    train_model,
    write_json,
)
from .preprocess import (
    ClaimClassifier,
    PreprocessResources,
    build_corpus,
    load_raw_corpus,
    read_sentences,
    train_claim_classifier,
)
from .seeding import derive_seed
from .synthetic import write_synthetic_dataset

console = Console()
error_console = Console(stderr=True)

MASK_CHOICE = click.Choice([mask.value for mask in ItemMask])
EXISTING_FILE = click.Path(exists=True, dir_okay=False, path_type=Path)
OUTPUT_PATH = click.Path(dir_okay=False, path_type=Path)

def _masks(values: Sequence[str]) -> Optional[List[ItemMask]]:
    return [ItemMask(value) for value in values] if values else None

def _report_table(title: str, values: Dict[str, Any]) -> Table:
    table = Table(title=title)
    table.add_column("Metric")
    table.add_column("Value", justify="right")
    for key, value in values.items():
        table.add_row(key, f"{value:.2f}" if isinstance(value, float) else str(value))
    return table

@click.group()
@click.option('--log-level', default=None, help='Log level (overrides MIXPLAN_LOG_LEVEL)')
@click.option('--log-dir', type=click.Path(file_okay=False, path_type=Path), default=None,
              help='Directory for log files (overrides MIXPLAN_LOG_DIR)')
def cli(log_level: Optional[str], log_dir: Optional[Path]):
    """Dynamic content planning with mixed item-conditioned language models."""
    configure_logging(log_level, log_dir)

@cli.command()
@click.option('--input', 'input_path', type=EXISTING_FILE, required=True, help='Raw corpus (id, title, reference per line)')
@click.option('--entities', type=EXISTING_FILE, required=True, help='Entity dictionary TSV')
@click.option('--concepts', type=EXISTING_FILE, required=True, help='Concept lexicon TSV')
@click.option('--concreteness', type=EXISTING_FILE, required=True, help='Concreteness lexicon TSV')
@click.option('--abbreviations', type=EXISTING_FILE, default=None, help='Abbreviation list (defaults to the bundled one)')
@click.option('--claims', type=EXISTING_FILE, default=None, help='Claim sentences for the claim classifier')
@click.option('--facts', type=EXISTING_FILE, default=None, help='Fact sentences for the claim classifier')
@click.option('--classifier-out', type=OUTPUT_PATH, default=None, help='Where to save the trained claim classifier')
@click.option('--seed', default=0, show_default=True, help='Claim classifier seed')
@click.option('--output', type=OUTPUT_PATH, required=True, help='Output corpus JSONL')
def preprocess(input_path: Path, entities: Path, concepts: Path, concreteness: Path, abbreviations: Optional[Path],
               claims: Optional[Path], facts: Optional[Path], classifier_out: Optional[Path], seed: int, output: Path):
    """Build content items and plan labels from titled references."""
    if (claims is None) != (facts is None):
        raise click.UsageError("--claims and --facts must be given together")
    classifier = None
    if claims is not None:
        classifier = train_claim_classifier(read_sentences(claims), read_sentences(facts), seed=seed)
        if classifier_out is not None:
            classifier.save(classifier_out)
    resources = PreprocessResources.from_paths(entities, concepts, concreteness, abbreviations, classifier)
    samples = build_corpus(load_raw_corpus(input_path), resources)
    save_corpus(samples, output)
    click.secho(f"✓ Wrote {len(samples)} samples to {output}", fg='green')

@cli.command()
@click.option('--corpus', type=EXISTING_FILE, required=True, help='Corpus whose items are augmented')
@click.option('--mode', type=click.Choice([mode.value for mode in AugmentMode]), required=True)
@click.option('--model', 'model_path', type=OUTPUT_PATH, required=True,
              help='Generator checkpoint; written when --train-corpus is given, read otherwise')
@click.option('--train-corpus', type=EXISTING_FILE, default=None, help='Train the generator on this corpus first')
@click.option('--config', 'config_path', type=EXISTING_FILE, default=None, help='Experiment config for model and training settings')
@click.option('--nucleus-p', type=float, default=None, help='Nucleus mass for claim sampling')
@click.option('--seed', type=int, default=None, help='Seed (overrides the config seed)')
@click.option('--out', 'output', type=OUTPUT_PATH, required=True, help='Augmented corpus JSONL')
def augment(corpus: Path, mode: str, model_path: Path, train_corpus: Optional[Path], config_path: Optional[Path],
            nucleus_p: Optional[float], seed: Optional[int], output: Path):
    """Replace expanded concepts or claims with generated ones."""
    config = _load_config(config_path, seed=seed, nucleus_p=nucleus_p)
    augment_mode = AugmentMode(mode)
    if train_corpus is not None:
        training = config.to_training_config(max_epochs=config.augment_max_epochs).model_copy(
            update={"seed": derive_seed(config.seed, "augment")}
        )
        generator = train_generator(augment_mode, load_corpus(train_corpus), config.to_model_config(), training)
        generator.save(model_path)
    else:
        if not model_path.exists():
            raise click.UsageError(f"Generator checkpoint {model_path} does not exist; pass --train-corpus to train one")
        generator = ConditionalGenerator.load(model_path)
    generators = (generator, None) if augment_mode is AugmentMode.CONCEPTS else (None, generator)
    samples = augment_corpus(load_corpus(corpus), *generators, config.nucleus_p, derive_seed(config.seed, "augment"))
    save_corpus(samples, output)
    click.secho(f"✓ Augmented {len(samples)} samples ({augment_mode.value}) into {output}", fg='green')

def _load_config(config_path: Optional[Path], **overrides: Any) -> ExperimentConfig:
    if config_path is None:
        return ExperimentConfig.from_dict({"seed": 0, **{k: v for k, v in overrides.items() if v is not None}})
    return ExperimentConfig.from_file(config_path, **overrides)

@cli.command()
@click.option('--corpus', type=EXISTING_FILE, required=True, help='Training corpus')
@click.option('--val', type=EXISTING_FILE, required=True, help='Validation corpus')
@click.option('--config', 'config_path', type=EXISTING_FILE, required=True, help='Experiment config JSON')
@click.option('--mask', 'masks', type=MASK_CHOICE, multiple=True, help='Item element to remove (repeatable)')
@click.option('--plan-loss-weight', type=float, default=None, help='Weight of L_plan in the training loss')
@click.option('--out', 'output', type=OUTPUT_PATH, required=True, help='Checkpoint path')
def train(corpus: Path, val: Path, config_path: Path, masks: Tuple[str, ...], plan_loss_weight: Optional[float],
          output: Path):
    """Train the mixed language model with early stopping on validation loss."""
    config = ExperimentConfig.from_file(config_path, masks=_masks(masks), plan_loss_weight=plan_loss_weight)
    model, result = train_model(load_corpus(corpus), load_corpus(val), config, derive_seed(config.seed, "train"))
    save_checkpoint(model, output, metadata={"system": config.system, "best_epoch": result.best_epoch})
    write_json(result.to_dict(), output.with_name("training_log.json"))
    click.secho(f"✓ Best epoch {result.best_epoch} (validation loss {result.best_val_loss:.4f}); saved {output}", fg='green')

@cli.command()
@click.option('--ckpt', type=EXISTING_FILE, required=True, help='Trained model checkpoint')
@click.option('--corpus', type=EXISTING_FILE, required=True, help='Corpus to generate for')
@click.option('--mode', type=click.Choice([mode.value for mode in DecodeMode]), default=DecodeMode.WEIGHTED.value,
              show_default=True)
@click.option('--system', type=click.Choice(["mixed", "seq2seqfull"]), default="mixed", show_default=True)
@click.option('--mask', 'masks', type=MASK_CHOICE, multiple=True, help='Item element to remove (repeatable)')
@click.option('--max-len', default=200, show_default=True, help='Maximum output tokens')
@click.option('--seed', default=0, show_default=True, help='Seed for random_select item draws')
@click.option('--out', 'output', type=OUTPUT_PATH, required=True, help='Generation JSONL')
def generate(ckpt: Path, corpus: Path, mode: str, system: str, masks: Tuple[str, ...], max_len: int, seed: int,
             output: Path):
    """Decode outputs with their per-step plan distributions."""
    model = load_checkpoint(ckpt)
    samples = system_inputs(load_corpus(corpus), system)
    records = generate_corpus(model, samples, DecodeMode(mode), max_len, seed, _masks(masks) or [])
    save_generations(records, output)
    click.secho(f"✓ Generated {len(records)} outputs into {output}", fg='green')

@cli.command()
@click.option('--hyp', type=EXISTING_FILE, required=True, help='Generation JSONL')
@click.option('--ref', type=EXISTING_FILE, required=True, help='Reference corpus JSONL')
@click.option('--out', 'output', type=OUTPUT_PATH, required=True, help='Metric report JSON')
def evaluate(hyp: Path, ref: Path, output: Path):
    """BLEU-2, ROUGE-2 and METEOR of generations against references."""
    report = evaluate_generations(load_generations(hyp), load_corpus(ref))
    write_json(report.to_dict(), output)
    console.print(_report_table("Automatic metrics", report.to_dict()))

@cli.command()
@click.option('--gen', type=EXISTING_FILE, required=True, help='Generation JSONL')
@click.option('--classifier', type=EXISTING_FILE, default=None, help='Claim classifier for claim realization')
@click.option('--out', 'output', type=OUTPUT_PATH, required=True, help='Analysis JSON')
def analyze(gen: Path, classifier: Optional[Path], output: Path):
    """Item coverage and claim realization of generations."""
    loaded = ClaimClassifier.load(classifier) if classifier is not None else None
    analysis = analyze_generations(load_generations(gen), loaded)
    write_json(analysis, output)
    realization = analysis["claim_realization"]
    rows: Dict[str, Any] = {"outputs": analysis["num_outputs"], "item coverage (%)": analysis["coverage"]}
    if realization is not None:
        rate = realization["rate"]
        rows["claim realization (%)"] = "undefined" if rate is None else rate
    console.print(_report_table("Alignment analysis", rows))

@cli.command()
@click.option('--config', 'config_path', type=EXISTING_FILE, required=True, help='Experiment config JSON')
@click.option('--resume', is_flag=True, help='Skip stages whose recorded outputs are unchanged')
@click.option('--until', type=click.Choice(STAGES), default=None, help='Stop after this stage')
def pipeline(config_path: Path, resume: bool, until: Optional[str]):
    """Run preprocess, augment, train, generate, evaluate and analyze."""
    config = ExperimentConfig.from_file(config_path)
    stages = STAGES[: STAGES.index(until) + 1] if until else STAGES
    manifest = ExperimentPipeline(config).run(resume=resume, stages=stages)
    table = Table(title=f"Experiment {config.output_dir}")
    table.add_column("Stage")
    table.add_column("Status")
    table.add_column("Seconds", justify="right")
    for record in manifest.stages:
        table.add_row(record.name, record.status, f"{record.duration_seconds:.1f}")
    console.print(table)

@cli.command()
@click.option('--out-dir', type=click.Path(file_okay=False, path_type=Path), required=True)
@click.option('--num-samples', default=50, show_default=True)
@click.option('--seed', default=0, show_default=True)
def synthesize(out_dir: Path, num_samples: int, seed: int):
    """Write a template-generated corpus, its resources and a matching config."""
    dataset = write_synthetic_dataset(out_dir, num_samples, seed)
    click.secho(f"✓ Synthetic dataset written; run: mixplan pipeline --config {dataset.config}", fg='green')

def main(argv: Optional[Sequence[str]] = None) -> int:
    load_dotenv()
    try:
        result = cli.main(args=list(argv) if argv is not None else None, standalone_mode=False)
    except click.exceptions.Abort:
        error_console.print("[red]Aborted[/red]")
        return ExitCode.USAGE
    except click.ClickException as e:
        e.show()
        return ExitCode.USAGE
    except MixplanError as e:
        detail = describe_error(e)
        error_console.print(f"[red]✗ {detail.title}: {detail.message}[/red]")
        for suggestion in detail.fix_suggestions:
            error_console.print(f"  - {suggestion}")
        return detail.exit_code
    return result if isinstance(result, int) else ExitCode.SUCCESS

if __name__ == '__main__':
    sys.exit(main())
