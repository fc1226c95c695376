"""
Main entry point for the Fano-Anderson simulation engine
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from dotenv import load_dotenv
from rich.console import Console
from rich.logging import RichHandler

# Load environment variables
load_dotenv()

# Add project root to Python path
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

from config import PIPELINES, SWEEP_PARAMETERS, ScenarioError, load_scenario, settings
from physics import FanoError
from runner import ScenarioRunner

console = Console()

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_INTERRUPTED = 130


def validate_inputs(config_path: str, workers: int) -> tuple[bool, str]:
    """Validate the scenario path and worker count."""
    path = Path(config_path)
    if not path.exists():
        return False, f"Scenario file not found: {config_path}"

    if not path.is_file():
        return False, f"Scenario path is not a file: {config_path}"

    if path.suffix.lower() not in (".yaml", ".yml"):
        return False, f"Scenario file must be YAML (.yaml or .yml): {config_path}"

    if workers < 1:
        return False, f"Worker count must be at least 1, got {workers}"

    return True, "Inputs are valid"


def print_banner():
    """Print application banner."""
    banner = """
╔═══════════════════════════════════════════════════════════════╗
║                                                               ║
║          ⚛️  Fano-Anderson Open-System Simulator ⚛️            ║
║                                                               ║
║   Exact TCL Coefficients • Thermodynamics • Finite-Bath Oracle ║
║                                                               ║
╚═══════════════════════════════════════════════════════════════╝
    """
    console.print(banner)


def configure_logging(verbose: bool):
    level = logging.DEBUG if verbose else getattr(logging, settings.log_level.upper(), logging.INFO)
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=console, rich_tracebacks=verbose, show_path=verbose)],
        force=True,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Simulate the exact reduced dynamics and thermodynamics of the Fano-Anderson model",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Transient dynamics and thermodynamic ledger
  python main.py simulate --config data/scenarios/simulate_flat.yaml

  # Nonequilibrium steady state with a resonance sweep
  python main.py ness --config data/scenarios/ness_single_mode.yaml --out outputs/ness

  # Finite-bath oracle comparison under the strict tolerance profile
  python main.py oracle-check --config data/scenarios/oracle_lorentzian.yaml --tolerance-profile strict

  # Sweep the drive frequency across resonance on 4 workers
  python main.py sweep --config data/scenarios/sweep_resonance.yaml --parameter omega_d --values 0.8 0.9 1.0 1.1 --workers 4
        """
    )

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config",
        required=True,
        help="Path to the YAML scenario file"
    )
    common.add_argument(
        "--out",
        help="Output directory for CSV and JSON artifacts (default: scenario output_dir, then "
             f"{settings.output_dir})",
        default=None
    )
    common.add_argument(
        "--workers",
        type=int,
        help=f"Concurrent sweep points (default: {settings.workers})",
        default=settings.workers
    )
    common.add_argument(
        "--tolerance-profile",
        choices=["default", "strict"],
        help=f"Numeric gate profile (default: {settings.tolerance_profile})",
        default=settings.tolerance_profile
    )
    common.add_argument(
        "--verbose",
        action="store_true",
        help="Enable debug logging and tracebacks"
    )

    subparsers = parser.add_subparsers(dest="command", required=True)
    for name in PIPELINES:
        sub = subparsers.add_parser(name, parents=[common], help=f"Run the {name} pipeline")
        if name == "sweep":
            sub.add_argument(
                "--parameter",
                choices=SWEEP_PARAMETERS,
                help="Scenario parameter to sweep (default: sweep.parameter in the scenario)"
            )
            sub.add_argument(
                "--values",
                type=float,
                nargs="+",
                help="Values of the swept parameter (default: sweep.values in the scenario)"
            )
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main application entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose or settings.verbose)
    print_banner()

    # Validate inputs
    console.print("🔍 Validating inputs...")
    valid, message = validate_inputs(args.config, args.workers)
    if not valid:
        console.print(f"❌ {message}")
        return EXIT_CONFIG
    console.print(f"✅ {message}")

    console.print("📋 Checking scenario schema...")
    try:
        config = load_scenario(args.config)
        config = config.model_copy(update={"pipeline": args.command})
    except ScenarioError as e:
        console.print(f"❌ {e}", markup=False)
        return EXIT_CONFIG
    console.print(f"✅ Scenario '{config.name}' is valid")

    output_dir = args.out or config.output_dir or settings.output_dir

    # Show configuration
    console.print(f"\n⚙️  Configuration:")
    console.print(f"   Pipeline: {args.command}")
    console.print(f"   Scenario: {args.config}")
    console.print(f"   Output Directory: {output_dir}")
    console.print(f"   Tolerance Profile: {args.tolerance_profile}")
    console.print(f"   Workers: {args.workers}")

    try:
        runner = ScenarioRunner(
            output_dir=output_dir,
            workers=args.workers,
            tolerance_profile=args.tolerance_profile
        )
        base_dir = Path(args.config).resolve().parent

        if args.command == "sweep":
            sweep = config.sweep
            parameter = args.parameter or (sweep.parameter if sweep is not None else None)
            values = args.values or (sweep.values if sweep is not None else None)
            if parameter is None or not values:
                console.print("❌ A sweep needs --parameter and --values or a 'sweep' section in the scenario")
                return EXIT_CONFIG
            manifest = runner.run_sweep(config, parameter, values, base_dir)
        else:
            manifest = runner.run(config, base_dir)

        if manifest["status"] != "ok":
            console.print(f"\n❌ Run finished with status '{manifest['status']}'")
            console.print(f"📁 Results saved to: {output_dir}/")
            return EXIT_FAILURE

        console.print(f"\n🎉 {args.command} completed successfully!")
        console.print(f"📁 Results saved to: {output_dir}/")
        return EXIT_OK

    except KeyboardInterrupt:
        console.print(f"\n\n⚠️ Process interrupted by user")
        return EXIT_INTERRUPTED
    except ScenarioError as e:
        console.print(f"❌ {e}", markup=False)
        return EXIT_CONFIG
    except (FanoError, ValueError, ArithmeticError) as e:
        console.print(f"\n❌ Pipeline failed: {e}", markup=False)
        console.print(f"📁 Partial results saved to: {output_dir}/")
        if args.verbose:
            import traceback
            traceback.print_exc()
        return EXIT_FAILURE
    except Exception as e:
        console.print(f"\n❌ Error during run: {e}", markup=False)
        if args.verbose:
            import traceback
            traceback.print_exc()
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
