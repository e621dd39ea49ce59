# Sphinx configuration of the Peerselect documentation.

import os
import sys

sys.path.insert(0, os.path.abspath('../../src'))

from peerselect import __version__  # noqa: E402

project = 'Peerselect'
copyright = '2026, the Peerselect developers'
author = 'the Peerselect developers'
release = __version__

# autodoc for the API pages, sphinx-argparse for the command line reference
extensions = [
    'sphinx.ext.autodoc',
    'sphinxarg.ext',
]

autodoc_default_options = {
    'members': True,
    'member-order': 'bysource',
    'show-inheritance': True,
}

html_theme = 'sphinx_rtd_theme'
