# Census engines, closed forms and family construction
