1 = 2;