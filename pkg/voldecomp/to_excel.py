import logging
from pathlib import Path

import pandas as pd

logger = logging.getLogger(__name__)


def convert_to_excel(table: pd.DataFrame, output_path: Path, sheet_name: str, *, title: str | None = None) -> Path:
    """
    Write a summary table to a single-sheet Excel workbook.

    Args:
        table (DataFrame): The rows to export, one column per header.
        output_path (Path): The .xlsx file to write.
        sheet_name (str): The name of the sheet in the workbook.
        title (str, optional): A caption written above the header row.
    """
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)

    start_row = 2 if title else 0
    with pd.ExcelWriter(output_path, engine="openpyxl") as writer:
        table.to_excel(writer, index=False, sheet_name=sheet_name, startrow=start_row)
        sheet = writer.sheets[sheet_name]
        if title:
            sheet.cell(row=1, column=1, value=title)
        for idx, column in enumerate(table.columns, start=1):
            width = max([len(str(column))] + [len(str(v)) for v in table[column].tolist()])
            sheet.column_dimensions[sheet.cell(row=start_row + 1, column=idx).column_letter].width = width + 2

    logger.info("Excel table written to %s", output_path)
    return output_path
