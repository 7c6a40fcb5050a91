# Domain unit tests