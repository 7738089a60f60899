# Sphinx configuration for the acclqr documentation.
import os
import re
import sys

here = os.path.dirname(__file__)
root = os.path.abspath(os.path.join(here, '..'))
sys.path.insert(0, root)


def _release() -> str:
    with open(os.path.join(root, 'setup.py')) as f:
        match = re.search(r"version='([^']+)'", f.read())
    return match.group(1) if match else 'unknown'


project = 'acclqr'
author = 'The acclqr developers'
copyright = '2024, The acclqr developers'
release = _release()
version = '.'.join(release.split('.')[:2])

extensions = [
        'sphinx.ext.autodoc', 'sphinx.ext.mathjax', 'sphinx.ext.napoleon']
master_doc = 'index'
source_suffix = '.rst'
language = 'en'
exclude_patterns = ['_build']
pygments_style = 'sphinx'

# docstrings use Google style, with math written out in Unicode
napoleon_google_docstring = True
napoleon_numpy_docstring = False
autodoc_default_options = {
        'members': None,
        'member-order': 'bysource',
        'special-members': '__init__'}
autodoc_typehints = 'description'
# the Matrix, Gain and Seed aliases expand to long numpy unions otherwise
autodoc_type_aliases = {
        'Matrix': 'acclqr.linalg.Matrix',
        'Gain': 'acclqr.problem.Gain',
        'Seed': 'acclqr.linalg.Seed'}

html_theme = 'sphinx_rtd_theme'
htmlhelp_basename = 'acclqr_doc'

man_pages = [
    (master_doc, 'acclqr', 'acclqr Documentation', [author], 1)
]
