"""nlq: turn natural-language questions into restricted SQL and answers.

The pipeline is fully rule- and gazetteer-driven plus two small linear
classifiers; there is no model training at question time. Everything runs
against in-memory tables loaded from CSV, so the package has no runtime
dependencies outside the standard library.
"""

__version__ = "0.1.0"
