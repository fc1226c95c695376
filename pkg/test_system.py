"""
Simple test script to verify the system is working
"""

import sys
from pathlib import Path

# Add current directory to Python path
sys.path.insert(0, str(Path(__file__).parent))

SCENARIO_DIR = Path(__file__).parent / "data" / "scenarios"


def test_imports():
    """Test that all modules can be imported."""
    print("🧪 Testing imports...")

    from config import settings
    print("✅ Config imported successfully")

    from physics import solve_green, build_coefficients, thermodynamics
    print("✅ Physics imported successfully")

    from pipelines import ScenarioPipelines
    print("✅ Pipelines imported successfully")

    from runner import ScenarioRunner
    print("✅ Runner imported successfully")

    print("🎉 All imports successful!")


def test_configuration():
    """Test configuration loading."""
    print("\n⚙️ Testing configuration...")

    from config import TOLERANCE_PROFILES, settings

    print(f"Output directory: {settings.output_dir}")
    print(f"Workers: {settings.workers}")
    print(f"Tolerance profile: {settings.tolerance_profile}")

    assert settings.workers >= 1
    assert set(TOLERANCE_PROFILES) == {"default", "strict"}
    strict, default = TOLERANCE_PROFILES["strict"], TOLERANCE_PROFILES["default"]
    assert strict.first_law <= default.first_law
    assert strict.quadrature_epsabs <= default.quadrature_epsabs


def test_scenarios():
    """Test that every bundled scenario validates and builds."""
    print("\n📄 Testing bundled scenarios...")

    from config import load_scenario

    files = sorted(SCENARIO_DIR.glob("*.yaml"))
    assert files, f"No scenarios found in {SCENARIO_DIR}"
    for path in files:
        config = load_scenario(path)
        scenario = config.build(path.parent)
        print(f"✅ {path.name}: {config.pipeline}, {scenario.grid.steps} samples")


def main():
    """Run all tests."""
    print("🚀 Running system tests...\n")

    tests = [
        test_imports,
        test_configuration,
        test_scenarios
    ]

    results = []
    for test in tests:
        try:
            test()
            results.append(True)
        except Exception as e:
            print(f"❌ {test.__name__} failed: {e}")
            results.append(False)

    print(f"\n📊 Test Results:")
    print(f"Passed: {sum(results)}/{len(results)}")

    if all(results):
        print("🎉 All tests passed! System is ready to use.")
        print("\n💡 Next steps:")
        print("1. Optionally copy .env.example to .env and adjust FANO_* settings")
        print("2. Run a scenario with: python main.py simulate --config data/scenarios/simulate_flat.yaml")
        print("3. Run the full suite with: pytest")
    else:
        print("❌ Some tests failed. Please check the errors above.")

    return all(results)


if __name__ == "__main__":
    success = main()
    sys.exit(0 if success else 1)
