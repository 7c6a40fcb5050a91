# Domain layer - Core inference entities and contracts
