"""soldefect — static analysis of Ethereum smart contracts.

Detects 20 contract defect kinds from Solidity source (a 0.4.x-era
subset grammar) and from EVM bytecode, reports findings with a
category/impact taxonomy, and scores itself against labeled corpora.
"""

__version__ = "0.1.0"

TOOL_NAME = "soldefect"
