"""
LangGraph workflow for the analysis commands.
Implements nodes and edges for loading inputs, running one analysis and writing reports.
"""

from typing import TYPE_CHECKING, Any, Callable, Dict, List, Optional, Tuple, TypedDict

import numpy as np
from langgraph.graph import END, StateGraph

from ..analysis.criteria import lappan_five, lappan_four
from ..analysis.exprparse import format_expr
from ..analysis.mapfn import HarmonicMap, fsharp_from_parts, sample
from ..analysis.normality import classical_normal_sup, classify_normality
from ..analysis.phi import (
    PhiWeight,
    boundary_growth,
    phi_eval,
    reciprocal_convexity_check,
    smooth_increase_check,
)
from ..analysis.rescale import (
    convergence_probe,
    extract_sequence,
    family_rescale_check,
    rescaled_spherical,
)
from ..analysis.roots import find_preimages
from ..config import Config
from ..errors import CriterionPreconditionError, HarmonicNormalityError, InputError
from ..integrations.mapfile import MapFileLoader, parse_targets, parse_weight_spec
from ..models import Disc, complex_pair
from ..utils.logger import get_logger
from ..utils.report_storage import ReportStorage

if TYPE_CHECKING:
    from ..cli import RunConfig

CsvExport = Tuple[str, List[str], List[List[Any]]]

TRACE_HEADER = ['radius', 'value', 'argmax_re', 'argmax_im', 'evaluations']
SEQUENCE_HEADER = ['n', 'r_n', 'z_n_re', 'z_n_im', 'M_n', 'rho_n', 'R_n']
PREIMAGE_HEADER = ['a_re', 'a_im', 'root_re', 'root_im', 'multiplicity', 'residual',
                   'local_degree']
CRITERION_HEADER = ['a_re', 'a_im', 'radius', 'preimage_count', 'sup_ratio', 'sup_second']

COMMANDS_WITHOUT_MAP = ('phi-check',)
DEFAULT_PREIMAGE_RADIUS = 1.0
DEFAULT_FIELD_RADIUS = 0.9
DEFAULT_FIELD_GRID = 128
DEFAULT_PROBE_RADIUS = 1.0
DEFAULT_PROBE_GRID = 33


class AnalysisWorkflowState(TypedDict):
    """State for the analysis workflow."""
    # Input parameters
    run_config: Any

    # Loaded inputs
    harmonic_map: Optional[HarmonicMap]
    weight: Optional[PhiWeight]
    targets: List[complex]

    # Analysis output
    report: Dict[str, Any]
    exports: List[CsvExport]
    field_rows: Optional[List[List[Any]]]
    written_files: List[str]

    # Status and metadata
    workflow_status: str  # 'running', 'completed', 'error'
    error_message: Optional[str]
    exit_code: int

    # Results
    results: Dict[str, Any]


class AnalysisWorkflow:
    """LangGraph workflow running one analysis command end to end."""

    def __init__(self, config: Config):
        """Initialize analysis workflow."""
        self.config = config
        self.logger = get_logger(config, "harmonic_normality.analysis_workflow")
        self.loader = MapFileLoader(config)
        self.commands: Dict[str, Callable[[AnalysisWorkflowState], Tuple[Dict[str, Any],
                                                                        List[CsvExport]]]] = {
            "analyze": self._analyze,
            "rescale": self._rescale,
            "preimages": self._preimages,
            "lappan": self._lappan,
            "phi-check": self._phi_check,
            "field-export": self._field_export,
        }
        self.workflow = self._build_workflow()

    def _build_workflow(self):
        """Build the LangGraph workflow with nodes and edges."""
        workflow = StateGraph(AnalysisWorkflowState)

        workflow.add_node("initialize", self._initialize_node)
        workflow.add_node("load_inputs", self._load_inputs_node)
        workflow.add_node("run_analysis", self._run_analysis_node)
        workflow.add_node("write_reports", self._write_reports_node)
        workflow.add_node("finalize", self._finalize_node)
        workflow.add_node("handle_error", self._handle_error_node)

        workflow.set_entry_point("initialize")

        workflow.add_conditional_edges(
            "initialize",
            self._check_for_errors,
            {"continue": "load_inputs", "error": "handle_error"}
        )
        workflow.add_conditional_edges(
            "load_inputs",
            self._check_for_errors,
            {"continue": "run_analysis", "error": "handle_error"}
        )
        workflow.add_conditional_edges(
            "run_analysis",
            self._check_for_errors,
            {"continue": "write_reports", "error": "handle_error"}
        )
        workflow.add_conditional_edges(
            "write_reports",
            self._check_for_errors,
            {"continue": "finalize", "error": "handle_error"}
        )

        workflow.add_edge("finalize", END)
        workflow.add_edge("handle_error", END)

        return workflow.compile(checkpointer=None, debug=False)

    def _fail(self, state: AnalysisWorkflowState, stage: str, error: Exception) -> None:
        exit_code = error.exit_code if isinstance(error, HarmonicNormalityError) else 1
        state["error_message"] = f"{stage}: {error}"
        state["workflow_status"] = "error"
        state["exit_code"] = exit_code
        self.logger.error(f"{stage} failed: {error}", error_type=type(error).__name__,
                          exit_code=exit_code)

    def _initialize_node(self, state: AnalysisWorkflowState) -> AnalysisWorkflowState:
        """Initialize the analysis workflow."""
        run_config = state["run_config"]
        self.logger.info(f"Initializing {run_config.command} workflow",
                         command=run_config.command)
        state.update({
            "harmonic_map": None,
            "weight": None,
            "targets": [],
            "report": {},
            "exports": [],
            "field_rows": None,
            "written_files": [],
            "workflow_status": "running",
            "error_message": None,
            "exit_code": 0,
            "results": {},
        })

        self.logger.debug("configuration", summary=str(self.config))
        problems = self.config.validate()
        if problems:
            self._fail(state, "Configuration", InputError("; ".join(problems)))
        return state

    def _load_inputs_node(self, state: AnalysisWorkflowState) -> AnalysisWorkflowState:
        """Load the map file, weight specifier and target values."""
        run_config = state["run_config"]
        try:
            state["weight"] = parse_weight_spec(run_config.weight)
            state["targets"] = parse_targets(run_config.targets)
            if run_config.command not in COMMANDS_WITHOUT_MAP:
                state["harmonic_map"] = self.loader.load(run_config.map_path)
                self.logger.info("Map loaded", label=state["harmonic_map"].label,
                                 path=run_config.map_path)
        except Exception as e:
            self._fail(state, "Loading inputs", e)
        return state

    def _run_analysis_node(self, state: AnalysisWorkflowState) -> AnalysisWorkflowState:
        """Dispatch to the selected command."""
        run_config = state["run_config"]
        self.logger.info(f"Running {run_config.command}")
        try:
            body, exports = self.commands[run_config.command](state)
            report: Dict[str, Any] = {
                "command": run_config.command,
                "config": self._effective_config(run_config),
            }
            if state["harmonic_map"] is not None:
                report["map"] = self._describe_map(state["harmonic_map"])
            report.update(body)
            state["report"] = report
            state["exports"] = exports
        except Exception as e:
            self._fail(state, "Analysis", e)
        return state

    def _write_reports_node(self, state: AnalysisWorkflowState) -> AnalysisWorkflowState:
        """Write the JSON report and CSV exports."""
        storage = ReportStorage(state["run_config"].output_path)
        try:
            written = [str(storage.save_report(state["report"]))]
            for suffix, header, rows in state["exports"]:
                written.append(str(storage.write_csv(suffix, header, rows)))
            if state["field_rows"] is not None:
                written.append(str(storage.write_field_csv(state["field_rows"])))
            state["written_files"] = written
            self.logger.info("Reports written", files=written)
        except OSError as e:
            self._fail(state, "Writing reports", e)
        return state

    def _finalize_node(self, state: AnalysisWorkflowState) -> AnalysisWorkflowState:
        """Finalize the workflow and assemble results."""
        state["results"] = {
            "status": "success",
            "message": f"{state['run_config'].command} completed",
            "exit_code": 0,
            "files": state["written_files"],
            "summary": self._summary(state["report"]),
        }
        state["workflow_status"] = "completed"
        self.logger.info("Analysis workflow completed", files=state["written_files"])
        return state

    def _handle_error_node(self, state: AnalysisWorkflowState) -> AnalysisWorkflowState:
        """Handle workflow errors."""
        error_msg = state.get("error_message") or "Unknown error"
        self.logger.error(f"Analysis workflow error: {error_msg}")
        state["results"] = {
            "status": "error",
            "message": error_msg,
            "exit_code": state.get("exit_code") or 1,
            "files": state.get("written_files", []),
        }
        return state

    def _check_for_errors(self, state: AnalysisWorkflowState) -> str:
        """Check if there are errors in the current state."""
        if state["workflow_status"] == "error":
            return "error"
        return "continue"

    def run(self, run_config: "RunConfig") -> Dict[str, Any]:
        """Run the analysis workflow."""
        self.logger.info("Starting analysis workflow", command=run_config.command)
        initial_state = AnalysisWorkflowState(
            run_config=run_config,
            harmonic_map=None,
            weight=None,
            targets=[],
            report={},
            exports=[],
            field_rows=None,
            written_files=[],
            workflow_status="initialized",
            error_message=None,
            exit_code=0,
            results={},
        )

        try:
            final_state = self.workflow.invoke(initial_state, config={"recursion_limit": 50})
            return final_state["results"]
        except Exception as e:
            self.logger.error(f"Analysis workflow execution failed: {e}")
            return {
                "status": "error",
                "message": f"Workflow execution failed: {str(e)}",
                "exit_code": 1,
                "files": [],
            }

    def get_mermaid_diagram(self) -> str:
        """Generate Mermaid diagram representation of the workflow."""
        return """
graph TD
    A[Initialize] --> B[Load Map, Weight and Targets]
    B --> C[Run Analysis]
    C --> D[Write JSON and CSV Reports]
    D --> E[Finalize]

    A --> F[Handle Error]
    B --> F
    C --> F
    D --> F

    E --> G[END]
    F --> G

    style A fill:#e1f5fe
    style B fill:#fff3e0
    style C fill:#e8f5e8
    style D fill:#fff9c4
    style E fill:#c8e6c9
    style F fill:#ffcdd2
    style G fill:#f3e5f5
"""

    # Report helpers

    def _effective_config(self, run_config: "RunConfig") -> Dict[str, Any]:
        effective = run_config.effective()
        effective["tolerances"] = self.config.get_tolerances()
        effective["probe_samples"] = self.config.probe_samples
        effective["sampling_seed"] = self.config.sampling_seed
        return effective

    @staticmethod
    def _describe_map(m: HarmonicMap) -> Dict[str, Any]:
        return {
            "label": m.label,
            "h": format_expr(m.h),
            "g": format_expr(m.g),
            "z0": complex_pair(m.z0),
            "singularities": [complex_pair(s) for s in m.singularities],
        }

    @staticmethod
    def _summary(report: Dict[str, Any]) -> Dict[str, Any]:
        keys = ("classification", "final_sup", "verdict", "entries", "root_count")
        return {k: report[k] for k in keys if k in report}

    # Commands

    def _analyze(self, state: AnalysisWorkflowState):
        rc = state["run_config"]
        m, w = state["harmonic_map"], state["weight"]
        schedule = rc.schedule()
        verdict = classify_normality(m, w, schedule, rc.depth, self.config.max_workers)
        classical = classical_normal_sup(m, schedule[-1], rc.depth, self.config.max_workers)
        body = {
            "weight": w.to_dict(),
            "classification": verdict.kind.value,
            "final_sup": verdict.sup_trace[-1].value,
            "normality": verdict.to_dict(),
            "classical_sup": classical.to_dict(),
        }
        rows = [s.csv_row() for s in verdict.sup_trace]
        return body, [("trace", TRACE_HEADER, rows)]

    def _rescale(self, state: AnalysisWorkflowState):
        rc = state["run_config"]
        m, w = state["harmonic_map"], state["weight"]
        sequence = extract_sequence(m, w, rc.schedule(), rc.depth, self.config.max_workers)
        smallest = min(e.R_n for e in sequence.entries)
        probe_radius = rc.radius if rc.radius is not None else DEFAULT_PROBE_RADIUS
        if probe_radius >= smallest:
            self.logger.warning("Probe radius reduced below min R_n",
                                requested=probe_radius, min_R=smallest)
            probe_radius = 0.5 * smallest
        convergence = convergence_probe(m, w, sequence, probe_radius,
                                        rc.grid or DEFAULT_PROBE_GRID)
        body: Dict[str, Any] = {
            "weight": w.to_dict(),
            "sequence": sequence.to_dict(),
            "entries": len(sequence.entries),
            "rescaled_at_origin": [rescaled_spherical(m, w, e, 0j) for e in sequence.entries],
            "convergence": convergence.to_dict(),
        }
        if reciprocal_convexity_check(w):
            family = family_rescale_check(m, w, [e.z_n for e in sequence.entries],
                                          1.0, rc.grid or DEFAULT_PROBE_GRID)
            body["family"] = family.to_dict()
        else:
            body["family"] = {"skipped": "1/phi is not convex for this weight"}
        return body, [("sequence", SEQUENCE_HEADER, sequence.csv_rows())]

    def _preimages(self, state: AnalysisWorkflowState):
        rc = state["run_config"]
        m = state["harmonic_map"]
        if not state["targets"]:
            raise InputError("preimages needs at least one --target")
        region = Disc(0j, rc.radius if rc.radius is not None else DEFAULT_PREIMAGE_RADIUS)
        sets = [find_preimages(m, a, region, rc.tol, self.config.boundary_clearance,
                               self.config.multiplicity_tol, self.config.probe_samples,
                               self.config.sampling_seed) for a in state["targets"]]
        rows = [row for s in sets for row in s.csv_rows()]
        body = {
            "preimages": [s.to_dict() for s in sets],
            "root_count": sum(len(s.roots) for s in sets),
        }
        return body, [("preimages", PREIMAGE_HEADER, rows)]

    def _lappan(self, state: AnalysisWorkflowState):
        rc = state["run_config"]
        m, w, targets = state["harmonic_map"], state["weight"], state["targets"]
        if len(targets) == 5:
            report = lappan_five(m, w, targets, rc.schedule(), rc.tol, self.config.max_workers,
                                 self.config.probe_samples)
        elif len(targets) == 4:
            report = lappan_four(m, w, targets, rc.schedule(), rc.tol, self.config.max_workers,
                                 self.config.probe_samples)
        else:
            raise CriterionPreconditionError(
                f"lappan needs 4 or 5 --target values, got {len(targets)}")
        body = {"weight": w.to_dict(), "criterion": report.to_dict(),
                "verdict": report.verdict.value}
        return body, [("criterion", CRITERION_HEADER, report.csv_rows())]

    def _phi_check(self, state: AnalysisWorkflowState):
        rc = state["run_config"]
        w = state["weight"]
        schedule = rc.schedule()
        smooth = smooth_increase_check(w, schedule)
        body = {
            "weight": w.to_dict(),
            "phi_values": [phi_eval(w, r) for r in schedule],
            "smooth_increase": smooth.to_dict(),
            "reciprocal_convex": reciprocal_convexity_check(w),
            "boundary_growth": boundary_growth(w),
            "verdict": smooth.verdict.value,
        }
        rows = [[repr(r), repr(g), repr(d)] for r, g, d in
                zip(schedule, smooth.growth_trend, smooth.ratio_sup_deviation)]
        return body, [("phi", ['r', 'growth', 'ratio_sup_deviation'], rows)]

    def _field_export(self, state: AnalysisWorkflowState):
        rc = state["run_config"]
        m, w = state["harmonic_map"], state["weight"]
        radius = rc.radius if rc.radius is not None else DEFAULT_FIELD_RADIUS
        n = rc.grid or DEFAULT_FIELD_GRID
        rows, skipped = field_rows(m, w, radius, n)
        state["field_rows"] = rows
        body = {"weight": w.to_dict(), "field": {"radius": radius, "grid": n,
                                                 "rows": len(rows), "skipped": skipped}}
        return body, []


def field_rows(m: HarmonicMap, w, radius: float, n: int) -> Tuple[List[List[Any]], int]:
    """Polar grid of n radii by n angles; unavailable values are left empty."""
    radii = radius * np.arange(1, n + 1) / n
    theta = 2.0 * np.pi * np.arange(n) / n
    zs = (radii[:, None] * np.exp(1j * theta)[None, :]).ravel()
    s = sample(m, zs)
    fsharp = fsharp_from_parts(s.f, s.h1, s.g1)
    with np.errstate(all='ignore'):
        ratio = fsharp / w.value(np.abs(zs))
    rows = []
    for k, z in enumerate(zs):
        if s.valid[k]:
            rows.append([repr(z.real), repr(z.imag), repr(s.f[k].real), repr(s.f[k].imag),
                         repr(float(fsharp[k])), repr(float(ratio[k]))])
        else:
            rows.append([repr(z.real), repr(z.imag), '', '', '', ''])
    return rows, int((~s.valid).sum())
