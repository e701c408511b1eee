try { print("M"); } catch (ex) {}
try { while (null >= "") { break; } } catch (ex) {}
try { throw "break M"; } catch (ex) {}
try { for (var x = 0; x < 2; x = x + 1) { print(x); } } catch (ex) {}
try { throw "L"; } catch (ex) {}
try { if ("") {} else if (x) { print(null); } } catch (ex) {}
try { throw "{}"; } catch (ex) {}
try { throw "x"; } catch (ex) {}
try { throw "y"; } catch (ex) {}
try { throw "z"; } catch (ex) {}
try { throw "w"; } catch (ex) {}
try { throw "v"; } catch (ex) {}
try { throw "u"; } catch (ex) {}
