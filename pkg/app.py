"""
Main entry point for the R2OMC experiment runner.
"""
import os
import sys
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from src.presentation.cli import main


if __name__ == '__main__':
    sys.exit(main())
