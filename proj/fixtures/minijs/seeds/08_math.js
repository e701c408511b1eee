/* numeric builtins */
print(Math.max(3, 9), Math.floor(2.7), parseInt("42"), isNaN(NaN), 1 / 0);
