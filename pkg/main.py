#!/usr/bin/env python3
"""
Harmonic Normality Toolkit - Main Entry Point
LangGraph-based analysis runner for phi-normality of harmonic mappings.
"""

from harmonic_normality.workflows.analysis_workflow import AnalysisWorkflow
from harmonic_normality.errors import HarmonicNormalityError
from harmonic_normality.config import Config
from harmonic_normality import cli
import sys
import atexit
from pathlib import Path

# Add the project root to Python path
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

# Global variable to track the logger for cleanup
_global_logger = None


def cleanup_log():
    """Flush log handlers on exit."""
    if _global_logger:
        _global_logger.close_log_file()


def main(argv=None):
    """Main entry point for the harmonic normality toolkit."""
    parser = cli.build_parser()
    args = parser.parse_args(argv)

    print("Harmonic Normality Toolkit")
    print("=" * 60)

    try:
        # Load configuration; command-line flags override it
        config = Config()
        run_config = cli.resolve_run_config(args, config)

        print("[SUCCESS] Configuration loaded")
        print(f"   - Command: {run_config.command}")
        print(f"   - Map: {run_config.map_path or '-'}")
        print(f"   - Weight: {run_config.weight}")
        print(f"   - Schedule: r_n = 1 - {run_config.rstart} * {run_config.rfactor}^(n-1), "
              f"n = 1..{run_config.steps}")
        print(f"   - Depth: {run_config.depth}")
        print(f"   - Output: {run_config.output_path}")

        # Register cleanup function
        atexit.register(cleanup_log)

        global _global_logger
        workflow = AnalysisWorkflow(config)
        _global_logger = workflow.logger
        print("[SUCCESS] Analysis LangGraph workflow initialized")
        print(f"   - Actual Log File: {workflow.logger.get_log_file_path()}")

        print(f"\n[PROCESS] Running {run_config.command}...")
        print("-" * 40)

        result = cli.run(run_config, workflow=workflow)

        print("\n[DATA] Analysis Results:")
        print("-" * 40)

        if result['status'] != 'success':
            print(f"[ERROR] {result['message']}", file=sys.stderr)
            return result['exit_code']

        print(f"[SUCCESS] Status: {result['status']}")
        print(f"[LIST] Message: {result['message']}")
        for key, value in result.get('summary', {}).items():
            print(f"[LIST] {key}: {value}")
        for path in result.get('files', []):
            print(f"[FOLDER] Wrote {path}")

    except HarmonicNormalityError as e:
        print(f"\n[ERROR] {e}", file=sys.stderr)
        return e.exit_code
    except KeyboardInterrupt:
        print("\n[STOP] Analysis interrupted by user")
        return 1
    except Exception as e:
        print(f"\n[ERROR] Unexpected error: {e}", file=sys.stderr)
        return 1

    print(f"\n[SUCCESS] {run_config.command} completed!")
    print(f"   Check log file for detailed traces: {config.log_file}")

    cleanup_log()
    return 0


if __name__ == "__main__":
    exit(main())
