"""
Parallel island-model wrapper for bi-objective feature subset selection.

Binary feature masks are evolved by NSGA-II, NSPSO or MOEA/D on horizontal
shards of the training data, scored by a logistic-regression wrapper
(balanced AUC and cardinality), and merged at each migration barrier by
non-dominated sorting.
"""

__version__ = "0.1.0"
