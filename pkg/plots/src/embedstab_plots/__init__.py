from .render import FigureSpec, ReportFormatError, read_report_csv, render_heatmap

__all__ = ["FigureSpec", "ReportFormatError", "read_report_csv", "render_heatmap"]
__version__ = "0.1.0"
