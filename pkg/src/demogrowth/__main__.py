from demogrowth.cli import main

raise SystemExit(main())
