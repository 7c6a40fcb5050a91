# Unit tests for Career Catalyst core library