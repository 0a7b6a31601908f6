"""HTTP surface: database and evaluator service apps."""
