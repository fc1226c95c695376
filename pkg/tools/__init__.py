"""
Tools package initialization
"""

from .export_tools import CsvExportTool, ManifestTool, make_check, to_builtin

__all__ = ['CsvExportTool', 'ManifestTool', 'make_check', 'to_builtin']
