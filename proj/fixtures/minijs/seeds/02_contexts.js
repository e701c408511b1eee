var t = "hello world";
if (/wor/.test(t)) print(RegExp.leftContext, RegExp.rightContext);
