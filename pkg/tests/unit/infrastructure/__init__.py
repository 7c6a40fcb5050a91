# Infrastructure unit tests