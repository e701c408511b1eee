var x = "3";
var y = x + 2;
var z = Number(x);
print(y, z, typeof y);
