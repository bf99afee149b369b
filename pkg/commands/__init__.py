"""
Commands package
One module per bs-sim subcommand, each exposing run(config) -> exit code
"""
