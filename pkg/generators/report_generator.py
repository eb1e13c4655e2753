#!/usr/bin/env python3
"""
Profile Report Generator
Renders a machine profile as markdown (Jinja2) with a metadata block, and optionally HTML
"""

import logging
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List

import frontmatter
import jinja2
import mistune

from spmvtune import __version__
from spmvtune.autotune import amortization_iterations
from spmvtune.config import PROJECT_ROOT

logger = logging.getLogger(__name__)

DEFAULT_TEMPLATES_DIR = PROJECT_ROOT / "templates" / "report"


class ReportGenerator:
    """Generate markdown reports from profiles"""

    def __init__(self, templates_dir=DEFAULT_TEMPLATES_DIR):
        self.templates_dir = Path(templates_dir)

        self.jinja_env = jinja2.Environment(
            loader=jinja2.FileSystemLoader(str(self.templates_dir)),
            trim_blocks=True,
            lstrip_blocks=True
        )
        self.jinja_env.filters['num'] = self._number_filter

    def _number_filter(self, value, digits: int = 4) -> str:
        """Jinja2 filter: compact number, '-' when absent"""
        if value is None:
            return "-"
        return f"{value:.{digits}g}"

    def _metadata(self, profile) -> Dict[str, Any]:
        return {
            'machine_label': profile.machine_label,
            'kernel_variant': profile.kernel_variant.value,
            'lanes': profile.lanes,
            'c': profile.c,
            'd_star': profile.d_star,
            'records': len(profile.records),
            'excluded': len(profile.records) - len(profile.included_records()),
        }

    def _table_rows(self, profile) -> List[Dict[str, Any]]:
        """Included records sorted by D_mat, the data of the D_mat / R graph"""
        rows = []
        for record in sorted(profile.included_records(), key=lambda r: r.stats.d_mat):
            rows.append({
                'matrix_id': record.matrix_id,
                'n': record.n,
                'nnz': record.nnz,
                'd_mat': record.stats.d_mat,
                'sp': record.metrics.sp,
                'tt': record.metrics.tt,
                'r': record.metrics.r,
                'passes': record.metrics.r >= profile.c,
                'iterations': amortization_iterations(record.timings),
            })
        return rows

    def render_markdown(self, profile) -> str:
        """Markdown document with a YAML metadata block"""
        template = self.jinja_env.get_template('profile_report.md.j2')
        body = template.render(
            profile=profile,
            rows=self._table_rows(profile),
            excluded=[record for record in profile.records if record.excluded],
            timestamp=datetime.now().strftime('%Y-%m-%d %H:%M:%S'),
            version=__version__,
        )
        post = frontmatter.Post(body, **self._metadata(profile))
        return frontmatter.dumps(post) + "\n"

    def render_html(self, markdown_text: str) -> str:
        """HTML for the markdown body; the metadata block is dropped"""
        body = frontmatter.loads(markdown_text).content
        return mistune.create_markdown(plugins=['table'])(body)


def write_report(profile, out_path, html=False, templates_dir=DEFAULT_TEMPLATES_DIR):
    """
    Write the markdown report, plus an .html sibling when html is set

    Returns:
        list: paths written
    """
    generator = ReportGenerator(templates_dir)
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)

    markdown_text = generator.render_markdown(profile)
    with open(out_path, 'w', encoding='utf-8') as f:
        f.write(markdown_text)
    written = [out_path]
    logger.info(f"Generated profile report: {out_path}")

    if html:
        html_path = out_path.with_suffix('.html')
        with open(html_path, 'w', encoding='utf-8') as f:
            f.write(generator.render_html(markdown_text))
        written.append(html_path)
        logger.info(f"Generated HTML report: {html_path}")
    return written
