"""
Benchmark simulators and the problem registry.
"""
