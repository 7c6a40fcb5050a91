# Infrastructure layer - Simulators, oracles, storage and configuration
