try { throw "e"; } catch (ex) { print(ex); }