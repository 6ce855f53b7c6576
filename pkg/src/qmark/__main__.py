from qmark.cli import main

main()
