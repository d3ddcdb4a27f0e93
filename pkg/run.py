#!/usr/bin/env python3
from lytrans.cli import main

if __name__ == "__main__":
    main()
