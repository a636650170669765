"""
评估报告的 JSON 与 CSV 输出
"""
import csv
import io
from pathlib import Path

from apps.system.utils import ReportWrapper, to_builtin, write_bytes_atomic, write_json_atomic


def rows_to_csv(rows):
    """字典列表 -> CSV 文本；表头取所有行键的并集（按首次出现的顺序）"""
    header = []
    for row in rows:
        for key in row:
            if key not in header:
                header.append(key)
    output = io.StringIO()
    writer = csv.writer(output, lineterminator='\n')
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(row.get(key)) for key in header])
    return output.getvalue()


def _cell(value):
    value = to_builtin(value)
    if value is None:
        return ''
    if isinstance(value, float):
        return repr(value)
    return value


def write_report(out_dir, name, data, rows, fmt='json'):
    """写出 <name>.json（ReportWrapper 包装）以及可选的 <name>.csv；返回写出的路径"""
    out_dir = Path(out_dir)
    paths = [write_json_atomic(out_dir / f'{name}.json', ReportWrapper.success(data))]
    if fmt == 'csv':
        paths.append(write_bytes_atomic(out_dir / f'{name}.csv', rows_to_csv(rows).encode('utf-8')))
    return paths
