var x=;