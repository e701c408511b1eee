var s = "a-b-c";
var m = s.replace(/-/g, "+");
RegExp.input = "ab";
print(m, RegExp.input);
