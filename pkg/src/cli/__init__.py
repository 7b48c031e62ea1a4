# Command line package initialization
