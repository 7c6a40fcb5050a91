# Domain interfaces