"""
Infrastructure repositories - filesystem implementations of domain repository interfaces.
"""
from .file_repositories import CsvResultsRepository, FileOracleSampleRepository

__all__ = [
    'CsvResultsRepository',
    'FileOracleSampleRepository',
]
