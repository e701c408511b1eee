var x=1;