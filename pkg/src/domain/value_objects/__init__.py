# Domain value objects