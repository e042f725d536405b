"""autotour: match landmarks in geotagged photos against OpenStreetMap
features using semi-annular sector-overlap geometry, then annotate and
narrate the scene.
"""

__version__ = "0.1.0"
