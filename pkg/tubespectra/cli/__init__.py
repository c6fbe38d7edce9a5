"""
Command line front end of *tubespectra*.
"""
