break;