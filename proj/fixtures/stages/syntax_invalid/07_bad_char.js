@