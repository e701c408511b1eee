print(y);