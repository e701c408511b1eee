try { throw "boom"; } catch (ex) { print("caught " + ex); }
