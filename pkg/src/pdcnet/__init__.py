"""Activity prediction for peptide-drug conjugates.

Modules: ``chem`` (SMILES, fingerprints), ``peptide`` (residue features,
alignment similarity), ``dataset`` (curation, labels, splits, novelty),
``ndmath`` (autodiff and layers), ``model`` (four-channel network),
``traineval`` (training and metrics), ``explain`` (attribution),
``baseline`` (logistic regression) and ``cli``.
"""

__version__ = "0.1.0"
