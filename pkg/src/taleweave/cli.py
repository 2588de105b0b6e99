"""Operator and test surface.

Exit codes are a stable contract: 0 success, 1 input/validation problems,
2 runtime/provider failures. All subcommands are deterministic under --seed
with mock providers.
"""
from __future__ import annotations

import os
import sys
from pathlib import Path

import click

from .analysis import (
    aggregate_coping,
    read_coping_csv,
    read_sus_csv,
    render_coping_table,
    render_sus_report,
    sus_stats,
)
from .assets import AssetStore
from .corpus import all_stories, coping_fixture_csv, story as corpus_story
from .docio import read_document, write_document
from .domain import StoryOutline, validate_outline_doc
from .engine import load_event_log, replay
from .errors import ProviderError, TaleWeaveError, ValidationFailure
from .ids import seeded_id_generator
from .pipeline import AgentPipeline
from .providers import ProviderConfig, ProviderGateway, load_provider_config
from .sim import rerun_exports, run_sim

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_RUNTIME = 2


def _default_seed() -> int:
    return int(os.environ.get("TALEWEAVE_SEED", "0"))


@click.group()
def cli():
    """TaleWeave: co-created four-chapter stories, headless."""


# -- sim ----------------------------------------------------------------------


@cli.group()
def sim():
    """Headless session simulation."""


@sim.command("run")
@click.option("--outline", "outline_file", required=True, type=click.Path(exists=True))
@click.option("--responses", "responses_file", required=True, type=click.Path(exists=True))
@click.option("--seed", type=int, default=None, help="defaults to TALEWEAVE_SEED or 0")
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--locale", default="en", show_default=True)
def sim_run(outline_file, responses_file, seed, out_dir, locale):
    """Run one scripted session with mock providers; write logs and exports."""
    seed = _default_seed() if seed is None else seed
    summary = run_sim(outline_file, responses_file, seed, out_dir, locale=locale)
    if summary["state"] != "complete":
        click.echo(f"session ended in state {summary['state']}", err=True)
        sys.exit(EXIT_RUNTIME)
    click.echo(f"session {summary['session_id']} complete; {summary['event_count']} events")
    for path in summary["exports"]:
        click.echo(f"  {path}")


# -- outlines -------------------------------------------------------------------


@cli.group()
def outline():
    """Author and validate story outlines."""


@outline.command("gen")
@click.option("--brief", required=True)
@click.option("--note", default="")
@click.option("--seed", type=int, default=None)
@click.option("--out", "out_file", required=True, type=click.Path())
@click.option("--provider-config", "provider_config_path", type=click.Path(exists=True))
def outline_gen(brief, note, seed, out_file, provider_config_path):
    """Draft a four-chapter outline from a brief."""
    seed = _default_seed() if seed is None else seed
    if provider_config_path:
        cfg = load_provider_config(provider_config_path)
    else:
        cfg = ProviderConfig(seed=seed)
    out_path = Path(out_file)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    assets = AssetStore(out_path.parent)
    gateway = ProviderGateway(cfg, assets)
    pipeline = AgentPipeline(gateway, ids=seeded_id_generator(seed))
    generated = pipeline.outline_agent(brief, note)
    write_document(out_path, generated.to_doc())
    click.echo(f"wrote {out_file} ({len(generated.chapters)} chapters)")


@outline.command("validate")
@click.argument("outline_file", type=click.Path(exists=True))
def outline_validate(outline_file):
    """Check an outline document; list violations."""
    doc = read_document(outline_file, expected_kind="story_outline")
    violations = validate_outline_doc(doc)
    if violations:
        for violation in violations:
            click.echo(f"{violation.code}: {violation.message}", err=True)
        sys.exit(EXIT_INPUT)
    StoryOutline.from_doc(doc)
    click.echo("outline is valid")


# -- exports ----------------------------------------------------------------------


@cli.command("export")
@click.option("--session", "session_dir", required=True, type=click.Path(exists=True))
@click.option("--variant", type=click.Choice(["print", "annotated"]), required=True)
@click.option(
    "--format",
    "export_format",
    type=click.Choice(["plain_text", "paginated_html", "interchange"]),
    required=True,
)
def export_cmd(session_dir, variant, export_format):
    """Compile a storybook from a stored session directory."""
    session_dir = Path(session_dir)
    log_path = session_dir / "session" / "events.log"
    if not log_path.is_file():
        log_path = session_dir / "events.log"
    if not log_path.is_file():
        raise ValidationFailure(f"no events.log under {session_dir}")
    session = replay(load_event_log(log_path))
    out_root = session_dir if (session_dir / "assets").is_dir() else session_dir.parent
    path = rerun_exports(session, out_root, variant, export_format)
    click.echo(str(path))


# -- stats -------------------------------------------------------------------------


@cli.group()
def stats():
    """Analysis instruments over CSV inputs."""


@stats.command("sus")
@click.option("--input", "input_file", required=True, type=click.Path(exists=True))
def stats_sus(input_file):
    """Score a usability questionnaire CSV (respondent_id,q1..q13)."""
    responses = read_sus_csv(input_file)
    if not responses:
        raise ValidationFailure("no questionnaire rows in input")
    click.echo(render_sus_report(sus_stats(responses)))


@stats.command("coping")
@click.option("--input", "input_file", required=True, type=click.Path(exists=True))
def stats_coping(input_file):
    """Aggregate coded coping responses (code,subscale[,text])."""
    tags = read_coping_csv(input_file)
    click.echo(render_coping_table(aggregate_coping(tags)))


# -- fixtures ----------------------------------------------------------------------


@cli.command("fixtures")
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--child", "child_id", default=None, help="one child id (e.g. C1); default all")
def fixtures_cmd(out_dir, child_id):
    """Write the bundled story corpus as outline/response fixture files."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stories = [corpus_story(child_id)] if child_id else all_stories()
    for item in stories:
        write_document(out_dir / f"{item.child_id.lower()}_outline.json", item.outline().to_doc())
        write_document(
            out_dir / f"{item.child_id.lower()}_responses.json", item.scripted_responses_doc()
        )
    (out_dir / "coping_codes.csv").write_text(coping_fixture_csv(), encoding="utf-8")
    click.echo(f"wrote {len(stories)} fixture pairs + coping_codes.csv to {out_dir}")


# -- serve --------------------------------------------------------------------------


@cli.command("serve")
@click.option("--data-dir", required=True, type=click.Path())
@click.option("--tokens", "token_file", required=True, type=click.Path(exists=True))
@click.option("--provider-config", "provider_config_path", type=click.Path(exists=True))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8571, show_default=True)
@click.option("--manual-advance", is_flag=True, default=False)
def serve(data_dir, token_file, provider_config_path, host, port, manual_advance):
    """Run the backstage HTTP service."""
    from .service import ServiceConfig, load_tokens, run_server

    cfg = (
        load_provider_config(provider_config_path)
        if provider_config_path
        else load_provider_config(None)
    )
    config = ServiceConfig(
        data_dir=data_dir,
        tokens=load_tokens(token_file),
        provider_config=cfg,
        manual_advance=manual_advance,
    )
    run_server(config, host=host, port=port)


def main():
    try:
        cli(standalone_mode=False)
    except click.exceptions.Abort:
        sys.exit(EXIT_RUNTIME)
    except click.ClickException as exc:
        exc.show()
        sys.exit(EXIT_INPUT)
    except (ValidationFailure,) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_INPUT)
    except ProviderError as exc:
        click.echo(f"provider error: {exc}", err=True)
        sys.exit(EXIT_RUNTIME)
    except TaleWeaveError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_RUNTIME)


if __name__ == "__main__":
    main()
