"""Terminal front door: generate, lint, validate, export, serve, replay.

Exit codes: 0 success, 1 domain failure (single machine-parseable line on
stderr), 2 usage error. Test mode is hermetic: scripted provider fixtures and
the mock catalog, fixed clock, content-addressed plan ids.
"""

from __future__ import annotations

import difflib
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import click

from .errors import PlanGlowError
from .lint import lint_plan
from .model import (
    BackgroundLevel,
    LearnerProfile,
    StudyPlan,
    deserialize_plan,
    serialize_plan,
    validate_profile,
)
from .pipeline import PromptBundle, content_plan_id, create_plan
from .providers import load_transcript
from .resources import MockCatalog, auto_replace
from .service import (
    DEFAULT_CATALOG,
    DEFAULT_TRANSCRIPT,
    ENV_DATA_DIR,
    ENV_MODE,
    ServiceConfig,
    create_app,
)
from .testing import scripted_clock


@dataclass
class CliConfig:
    mode: str
    data_dir: Path
    template_dir: Path | None
    fixtures: Path
    catalog: Path

    def service_config(self) -> ServiceConfig:
        if self.mode == "live":
            return ServiceConfig.live_mode(self.data_dir, template_dir=self.template_dir)
        return ServiceConfig.test_mode(
            self.data_dir,
            transcript_path=self.fixtures,
            catalog_path=self.catalog,
            template_dir=self.template_dir,
        )


def _fail(error: PlanGlowError) -> None:
    click.echo(f"error: {error.oneline()}", err=True)
    sys.exit(1)


def _load_plan_file(path: Path) -> StudyPlan:
    return deserialize_plan(path.read_text(encoding="utf-8"))


@click.group()
@click.option(
    "--mode",
    type=click.Choice(["test", "live"]),
    default=None,
    help=f"Defaults to ${ENV_MODE} or 'test'.",
)
@click.option(
    "--data-dir",
    type=click.Path(path_type=Path),
    default=None,
    help=f"Defaults to ${ENV_DATA_DIR} or ./planglow-data.",
)
@click.option("--template-dir", type=click.Path(path_type=Path), default=None)
@click.option(
    "--fixtures",
    type=click.Path(path_type=Path),
    default=None,
    help="Transcript fixture for test mode (defaults to the packaged one).",
)
@click.option(
    "--catalog",
    type=click.Path(path_type=Path),
    default=None,
    help="Mock catalog JSON for test mode (defaults to the packaged one).",
)
@click.pass_context
def main(ctx, mode, data_dir, template_dir, fixtures, catalog):
    """Study-plan engine CLI."""
    import os

    ctx.obj = CliConfig(
        mode=mode or os.environ.get(ENV_MODE, "test"),
        data_dir=data_dir or Path(os.environ.get(ENV_DATA_DIR, "./planglow-data")),
        template_dir=template_dir,
        fixtures=fixtures or DEFAULT_TRANSCRIPT,
        catalog=catalog or DEFAULT_CATALOG,
    )


@main.command()
@click.option("--subject", required=True)
@click.option("--goal", required=True)
@click.option(
    "--level",
    required=True,
    type=click.Choice([level.value for level in BackgroundLevel]),
)
@click.option("--weeks", required=True, type=int)
@click.option("--daily-minutes", required=True, type=int)
@click.pass_obj
def generate(config: CliConfig, subject, goal, level, weeks, daily_minutes):
    """Generate a plan and write the document plus its trace to the data dir."""
    profile = LearnerProfile(
        subject=subject,
        goal=goal,
        background_level=BackgroundLevel(level),
        duration_weeks=weeks,
        daily_minutes=daily_minutes,
    )
    try:
        problems = validate_profile(profile)
        if problems:
            raise PlanGlowError(
                "; ".join(f"{v.path}: {v.message}" for v in problems)
            )
        svc = config.service_config()
        plan, trace, replacements = create_plan(
            profile,
            svc.provider,
            svc.catalog,
            bundle=svc.bundle,
            clock=svc.clock,
            id_factory=svc.id_factory,
        )
        plans_dir = config.data_dir / "plans"
        plans_dir.mkdir(parents=True, exist_ok=True)
        plan_path = plans_dir / f"{plan.plan_id}-v{plan.version}.json"
        plan_path.write_text(serialize_plan(plan), encoding="utf-8")
        trace_path = plans_dir / f"{plan.plan_id}-v{plan.version}.trace.json"
        trace_path.write_text(
            json.dumps(trace.to_dict(), indent=2, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )
        for record in replacements:
            click.echo(
                f"{record.path}: {record.original_id} -> "
                f"{record.replacement_id or record.note}",
                err=True,
            )
        click.echo(str(plan_path))
    except PlanGlowError as exc:
        _fail(exc)


@main.command()
@click.argument("plan_file", type=click.Path(exists=True, path_type=Path))
@click.pass_obj
def lint(config: CliConfig, plan_file: Path):
    """Print the five-criterion quality report; exit 1 on any failure."""
    try:
        plan = _load_plan_file(plan_file)
        report = lint_plan(plan)
    except PlanGlowError as exc:
        _fail(exc)
        return
    for key in sorted(report.criteria):
        result = report.criteria[key]
        click.echo(f"{key} {result.status}")
        for finding in result.findings:
            click.echo(f"  - {finding}")
    click.echo(f"score: {report.score}/5")
    if report.has_failures:
        sys.exit(1)


@main.command("validate-resources")
@click.argument("plan_file", type=click.Path(exists=True, path_type=Path))
@click.pass_obj
def validate_resources(config: CliConfig, plan_file: Path):
    """Re-validate every resource against the catalog, rewriting the file."""
    try:
        plan = _load_plan_file(plan_file)
        svc = config.service_config()
        new_plan, replacements = auto_replace(plan, svc.catalog)
        plan_file.write_text(serialize_plan(new_plan), encoding="utf-8")
    except PlanGlowError as exc:
        _fail(exc)
        return
    if not replacements:
        click.echo("all resources valid; no replacements")
    for record in replacements:
        click.echo(
            f"{record.path}: {record.original_id} -> "
            f"{record.replacement_id or record.note}"
        )


_STATUS_MARKERS = {"valid": "[valid]", "invalid": "[INVALID]", "replaced": "[replaced]"}


def export_markdown(plan: StudyPlan) -> str:
    """Render a plan document as Markdown for humans."""
    profile = plan.profile
    lines = [
        f"<!-- plan {plan.plan_id} v{plan.version} -->",
        f"# Study plan: {profile.subject}",
        "",
        f"**Goal:** {profile.goal}  ",
        f"**Background:** {profile.background_level.value}  ",
        f"**Duration:** {profile.duration_weeks} weeks, "
        f"{profile.daily_minutes} minutes/day",
        "",
    ]
    for week in plan.weeks:
        lines.append(f"## Week {week.index}: {week.title}")
        lines.append("")
        lines.append("**Objectives:**")
        for obj in week.objectives:
            lines.append(f"- {obj.text} _[{obj.bloom_level.value}]_")
        lines.append("")
        lines.append(f"**Why this content:** {week.content_rationale}")
        lines.append("")
        lines.append(f"**Connections:** {week.connections}")
        lines.append("")
        for day in week.days:
            lines.append(f"### Day {day.index}: {day.topic}")
            lines.append("")
            lines.append(f"_{day.topic_rationale}_")
            lines.append("")
            for obj in day.objectives:
                lines.append(f"- {obj.text} _[{obj.bloom_level.value}]_")
            lines.append("")
            lines.append(f"Estimated time: {day.estimated_minutes} min")
            lines.append("")
            for res in day.resources:
                marker = _STATUS_MARKERS[res.status]
                lines.append(f"- {marker} [{res.title}]({res.url})")
            lines.append("")
    return "\n".join(lines).rstrip() + "\n"


@main.command()
@click.argument("plan_file", type=click.Path(exists=True, path_type=Path))
@click.option("--out", type=click.Path(path_type=Path), default=None)
@click.pass_obj
def export(config: CliConfig, plan_file: Path, out: Path | None):
    """Render a plan document to Markdown."""
    try:
        plan = _load_plan_file(plan_file)
    except PlanGlowError as exc:
        _fail(exc)
        return
    markdown = export_markdown(plan)
    if out:
        out.write_text(markdown, encoding="utf-8")
        click.echo(str(out))
    else:
        click.echo(markdown, nl=False)


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8400, type=int)
@click.pass_obj
def serve(config: CliConfig, host, port):
    """Run the HTTP service."""
    import logging

    import uvicorn

    logging.basicConfig(
        level=logging.INFO, format="%(asctime)s %(name)s %(message)s"
    )
    app = create_app(config.service_config())
    uvicorn.run(app, host=host, port=port, log_level="info", access_log=False)


@main.command()
@click.option(
    "--transcript",
    type=click.Path(exists=True, path_type=Path),
    default=None,
    help="Defaults to the packaged golden transcript.",
)
@click.option(
    "--golden",
    type=click.Path(exists=True, path_type=Path),
    default=None,
    help="Defaults to the packaged golden plan.",
)
@click.pass_obj
def replay(config: CliConfig, transcript: Path | None, golden: Path | None):
    """Re-run a recorded transcript and diff the result against a golden plan."""
    transcript = transcript or config.fixtures
    golden = golden or (DEFAULT_TRANSCRIPT.parent / "golden_plan.json")
    try:
        golden_text = Path(golden).read_text(encoding="utf-8")
        golden_plan = deserialize_plan(golden_text)
        provider = load_transcript(transcript)
        catalog = MockCatalog.from_file(config.catalog)
        bundle = (
            PromptBundle(config.template_dir) if config.template_dir else PromptBundle()
        )
        plan, _trace, _repl = create_plan(
            golden_plan.profile,
            provider,
            catalog,
            bundle=bundle,
            clock=scripted_clock,
            id_factory=content_plan_id,
        )
        document = serialize_plan(plan)
    except PlanGlowError as exc:
        _fail(exc)
        return
    if document == golden_text:
        click.echo("replay ok: plan matches golden document")
        return
    diff = difflib.unified_diff(
        golden_text.splitlines(keepends=True),
        document.splitlines(keepends=True),
        fromfile=str(golden),
        tofile="replayed",
    )
    click.echo("".join(diff), nl=False)
    click.echo("error: replay: replayed plan differs from golden document", err=True)
    sys.exit(1)


if __name__ == "__main__":
    main()
