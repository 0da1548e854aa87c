# Front-end, checker and interpreter services
