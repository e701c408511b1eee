continue;