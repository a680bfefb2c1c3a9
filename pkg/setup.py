#!/usr/bin/env python3
"""
Setup script for the Schubert solver
Installs the engine dependencies, creates .env and checks the counting benchmarks
"""

import shutil
import subprocess
import sys
from pathlib import Path


def run_command(command, cwd=None, check=True):
    """Run a command and handle errors"""
    try:
        result = subprocess.run(command, shell=True, cwd=cwd, check=check,
                                capture_output=True, text=True)
        return result.stdout
    except subprocess.CalledProcessError as e:
        print(f"Error running command: {command}")
        print(f"Error: {e.stderr}")
        return None


def check_python_version():
    """Check if Python version is compatible"""
    if sys.version_info < (3, 9):
        print("Python 3.9 or higher is required")
        print(f"Current version: {sys.version}")
        return False
    print(f"Python version: {sys.version.split()[0]}")
    return True


def setup_engine():
    """Install the engine dependencies"""
    engine_dir = Path("engine")
    if not engine_dir.exists():
        print("engine directory not found")
        return False

    print("Installing Python dependencies...")
    result = run_command(f"{sys.executable} -m pip install -r requirements.txt", cwd=engine_dir)
    if result is None:
        print("Failed to install Python dependencies")
        return False
    print("Engine dependencies installed")
    return True


def create_env_file():
    """Create environment file from example"""
    env_file = Path(".env")
    env_example = Path(".env.example")

    if env_file.exists():
        print(".env file already exists")
        return True
    if env_example.exists():
        shutil.copy(env_example, env_file)
        print("Created .env file from template")
        return True
    print(".env.example file not found")
    return False


def check_benchmarks():
    """Count the shipped benchmark problems"""
    result = run_command(f"{sys.executable} scripts/run_benchmarks.py --count-only")
    if result is None:
        print("Benchmark counts are off; see the log above")
        return False
    print("Benchmark counts match")
    return True


def main():
    print("Schubert solver setup")
    print("=" * 50)

    if not check_python_version():
        sys.exit(1)
    Path("data").mkdir(exist_ok=True)
    if not setup_engine():
        sys.exit(1)
    if not create_env_file():
        sys.exit(1)
    check_benchmarks()

    print("\nNext steps:")
    print("  cd engine && python -m schubert count ../benchmarks/four_lines.json")
    print("  cd engine && python -m pytest -m 'not slow'")


if __name__ == "__main__":
    main()
