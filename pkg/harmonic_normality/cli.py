"""
Command-line surface: run configuration, argument parser and dispatch.
"""

import argparse
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .config import Config
from .errors import InputError
from .workflows.analysis_workflow import COMMANDS_WITHOUT_MAP, AnalysisWorkflow

Command = Literal['analyze', 'rescale', 'preimages', 'lappan', 'phi-check', 'field-export']
COMMANDS = ('analyze', 'rescale', 'preimages', 'lappan', 'phi-check', 'field-export')


class RunConfig(BaseModel):
    """Effective configuration of one run, defaults resolved."""

    model_config = ConfigDict(frozen=True)

    command: Command
    map_path: Optional[str] = None
    weight: str = 'classical'
    rstart: float = Field(0.5, gt=0.0, lt=1.0)
    rfactor: float = Field(0.5, gt=0.0, lt=1.0)
    steps: int = Field(12, ge=1)
    depth: int = Field(8, ge=0)
    output_path: str = 'report.json'
    tol: float = Field(1e-10, gt=0.0)
    targets: List[str] = Field(default_factory=list)
    radius: Optional[float] = Field(None, gt=0.0)
    grid: Optional[int] = Field(None, ge=2)

    @model_validator(mode='after')
    def _check_paths(self) -> 'RunConfig':
        if not self.output_path.strip():
            raise ValueError("output path must be non-empty")
        if self.command not in COMMANDS_WITHOUT_MAP and not (self.map_path or '').strip():
            raise ValueError(f"{self.command} needs --map")
        if not self.weight.strip():
            raise ValueError("weight specifier must be non-empty")
        return self

    def schedule(self) -> List[float]:
        """r_n = 1 - rstart * rfactor^(n-1), n = 1..steps."""
        return [1.0 - self.rstart * self.rfactor ** (n - 1) for n in range(1, self.steps + 1)]

    def effective(self) -> Dict[str, Any]:
        """Configuration as embedded in reports."""
        data = self.model_dump()
        data['schedule'] = self.schedule()
        return data


def build_parser() -> argparse.ArgumentParser:
    """Argument parser for the toolkit."""
    parser = argparse.ArgumentParser(
        description="Numerical toolkit for phi-normality of harmonic mappings"
    )
    parser.add_argument('command', choices=COMMANDS, help='Analysis to run')
    parser.add_argument('--map', dest='map_path', help='Map file with h = ..., g = ... lines')
    parser.add_argument('--phi', dest='weight',
                        help="Weight: classical | inv_pow:alpha=<d> | inv_log:beta=<d>")
    parser.add_argument('--rstart', type=float, help='Schedule start offset (overrides config)')
    parser.add_argument('--rfactor', type=float, help='Schedule contraction (overrides config)')
    parser.add_argument('--steps', type=int, help='Number of schedule radii (overrides config)')
    parser.add_argument('--depth', type=int, help='Refinement depth (overrides config)')
    parser.add_argument('--out', dest='output_path', help='Report path (overrides config)')
    parser.add_argument('--tol', type=float, help='Residual tolerance (overrides config)')
    parser.add_argument('--target', dest='targets', action='append',
                        help='Target value as a complex literal; repeat for several values')
    parser.add_argument('--radius', type=float, help='Disc radius for preimages or field export')
    parser.add_argument('--grid', type=int, help='Grid size for field export or probes')
    return parser


def resolve_run_config(args: argparse.Namespace, config: Config) -> RunConfig:
    """Merge command-line flags over Config defaults; invalid values raise InputError."""
    def pick(value, default):
        return default if value is None else value

    schedule = config.get_schedule_defaults()
    try:
        return RunConfig(
            command=args.command,
            map_path=args.map_path,
            weight=pick(args.weight, 'classical'),
            rstart=pick(args.rstart, schedule['r_start']),
            rfactor=pick(args.rfactor, schedule['r_factor']),
            steps=pick(args.steps, schedule['steps']),
            depth=pick(args.depth, schedule['depth']),
            output_path=pick(args.output_path, config.default_output),
            tol=pick(args.tol, config.residual_tol),
            targets=pick(args.targets, config.default_targets),
            radius=args.radius,
            grid=args.grid,
        )
    except ValidationError as e:
        problems = "; ".join(f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}"
                             for err in e.errors())
        raise InputError(f"invalid run configuration: {problems}") from e


def run(run_config: RunConfig, config: Optional[Config] = None,
        workflow: Optional[AnalysisWorkflow] = None) -> Dict[str, Any]:
    """Run one command; the result carries status, message, exit_code and files."""
    workflow = workflow or AnalysisWorkflow(config or Config())
    return workflow.run(run_config)
